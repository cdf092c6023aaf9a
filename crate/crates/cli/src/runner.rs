//! Parallel execution of Monte Carlo blocks.

use mbt_core::metrics::{SimReport, Simulation, Tally};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// A worker pool of fixed size. Reports do not depend on its size: blocks
/// are computed independently and merged in block order.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `threads = 0` uses one worker per available core.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn simulate(&self, sim: &Simulation<'_>) -> Result<SimReport> {
        let tallies: Vec<Tally> = self
            .pool
            .install(|| (0..sim.blocks()).into_par_iter().map(|b| sim.run_block(b)).collect::<Result<_, _>>())?;
        Ok(sim.finish(&tallies))
    }

    /// Runs `f` over `items` on the pool, keeping input order.
    pub fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mbt_core::{Family, MechanismDef};

    #[test]
    fn pool_size_does_not_change_reports() {
        let f = Family::Bernoulli.prior(0.55, 0.2, 0.4).unwrap();
        let g = Family::Bernoulli.prior(0.45, 0.2, 0.4).unwrap();
        let m = MechanismDef::forced_from_priors(&f, &g);
        let sim = Simulation::new(Some(&m), &f, &g, 9, 30_000, 3).unwrap();
        let serial = sim.run().unwrap();
        for threads in [1, 2, 5] {
            assert_eq!(Runner::new(threads).unwrap().simulate(&sim).unwrap(), serial);
        }
    }
}
