//! Monte Carlo estimators for gains-from-trade, first best and IR
//! probability, plus exact and asymptotic values on the hardness instance.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`] consecutive
//! indices. A block's statistics depend only on the seed and the block
//! index, and blocks are merged by a fixed pairwise tree, so a report is the
//! same bit for bit however the blocks are scheduled.

mod hardness;

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::mechanisms::MechanismDef;
use crate::priors::Prior;
use crate::rng::TrialStreams;

pub use hardness::{
    fb_clt_hardness, fb_exact_hardness, hardness_alg_exact, hardness_alg_sum, hardness_ratio,
    randomized_hardness_bound, HardnessRatio, RandomizedBound, FB_EXACT_MAX_N,
};

/// Trials per block.
pub const BLOCK_TRIALS: u64 = 4096;

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
        }
    }

    /// Sample standard deviation over `√count`; zero below two samples.
    pub fn se(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        libm::sqrt(var / self.count as f64)
    }
}

/// Statistics of a contiguous run of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub gft: Moments,
    pub fb: Moments,
    /// `Σ (gft − mean gft)(fb − mean fb)`.
    pub co: f64,
    /// Trials whose outcome was individually rational for both sides.
    pub ir: u64,
}

impl Tally {
    pub fn push(&mut self, gft: f64, fb: f64, ir: bool) {
        let dg = gft - self.gft.mean;
        self.gft.push(gft);
        self.fb.push(fb);
        self.co += dg * (fb - self.fb.mean);
        self.ir += ir as u64;
    }

    pub fn merge(&self, other: &Tally) -> Tally {
        let (na, nb) = (self.trials() as f64, other.trials() as f64);
        let co = if na == 0.0 || nb == 0.0 {
            self.co + other.co
        } else {
            let dg = other.gft.mean - self.gft.mean;
            let df = other.fb.mean - self.fb.mean;
            self.co + other.co + dg * df * na * nb / (na + nb)
        };
        Tally { gft: self.gft.merge(&other.gft), fb: self.fb.merge(&other.fb), co, ir: self.ir + other.ir }
    }

    pub fn trials(&self) -> u64 {
        self.fb.count
    }
}

/// Merges per-block tallies, given in block order, by a balanced pairwise
/// tree whose shape depends only on their number.
pub fn merge_tallies(tallies: &[Tally]) -> Tally {
    match tallies.len() {
        0 => Tally::default(),
        1 => tallies[0],
        len => {
            let (lo, hi) = tallies.split_at(len / 2);
            merge_tallies(lo).merge(&merge_tallies(hi))
        }
    }
}

/// Outcome of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub gft_mean: f64,
    pub gft_se: f64,
    pub fb_mean: f64,
    pub fb_se: f64,
    pub ir_prob: f64,
    pub ir_se: f64,
    /// `gft_mean / fb_mean`; `None` when the first best is zero.
    pub efficiency: Option<f64>,
    /// Delta-method standard error of the efficiency ratio.
    pub efficiency_se: Option<f64>,
}

impl SimReport {
    pub fn from_tally(tally: &Tally, n: usize, seed: u64) -> Self {
        let trials = tally.trials();
        let ir_prob = if trials == 0 { 0.0 } else { tally.ir as f64 / trials as f64 };
        // sample sd of the IR indicator over √trials
        let ir_se = if trials < 2 {
            0.0
        } else {
            let t = trials as f64;
            libm::sqrt(ir_prob * (1.0 - ir_prob) / (t - 1.0))
        };
        let efficiency = (tally.fb.mean > 0.0).then(|| tally.gft.mean / tally.fb.mean);
        let efficiency_se = efficiency.map(|e| {
            if trials < 2 {
                return 0.0;
            }
            let t = trials as f64;
            let (vg, vf, c) = (tally.gft.m2 / (t - 1.0), tally.fb.m2 / (t - 1.0), tally.co / (t - 1.0));
            let var = (vg - 2.0 * e * c + e * e * vf).max(0.0) / (t * tally.fb.mean * tally.fb.mean);
            libm::sqrt(var)
        });
        SimReport {
            n,
            trials,
            seed,
            gft_mean: tally.gft.mean,
            gft_se: tally.gft.se(),
            fb_mean: tally.fb.mean,
            fb_se: tally.fb.se(),
            ir_prob,
            ir_se,
            efficiency,
            efficiency_se,
        }
    }
}

/// A Monte Carlo experiment split into independently computable blocks.
///
/// Trial `t` draws `n` values from `F` then `n` costs from `G` on stream `t`
/// of the seed, evaluates the mechanism under truthful reports, and records
/// the realized GFT `(Σv − Σc)·x`, the first best `(Σv − Σc)⁺` on the same
/// draws, and whether `Σ_i (x v_i − p) ≥ 0` and `Σ_j (r − x c_j) ≥ 0`.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    mech: Option<&'a MechanismDef>,
    values: &'a Prior,
    costs: &'a Prior,
    n: usize,
    trials: u64,
    streams: TrialStreams,
}

impl<'a> Simulation<'a> {
    pub fn new(
        mech: Option<&'a MechanismDef>,
        values: &'a Prior,
        costs: &'a Prior,
        n: usize,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if trials == 0 {
            bail!(Usage, "need at least one trial");
        }
        if let Some(m) = mech {
            m.validate(n)?;
        } else if n == 0 {
            bail!(Usage, "markets need n >= 1");
        }
        Ok(Self { mech, values, costs, n, trials, streams: TrialStreams::new(seed) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.streams.seed()
    }

    pub fn blocks(&self) -> usize {
        self.trials.div_ceil(BLOCK_TRIALS) as usize
    }

    /// Statistics of block `b`, trials `[b·BLOCK_TRIALS, (b+1)·BLOCK_TRIALS)`
    /// clipped to the trial count.
    pub fn run_block(&self, b: usize) -> Result<Tally> {
        let start = b as u64 * BLOCK_TRIALS;
        let end = (start + BLOCK_TRIALS).min(self.trials);
        let mut tally = Tally::default();
        let (mut bids, mut asks) = (alloc::vec![0.0; self.n], alloc::vec![0.0; self.n]);
        for t in start..end {
            let mut rng = self.streams.stream(t);
            for v in bids.iter_mut() {
                *v = rng.sample(self.values);
            }
            for c in asks.iter_mut() {
                *c = rng.sample(self.costs);
            }
            let (sv, sc): (f64, f64) = (bids.iter().sum(), asks.iter().sum());
            let surplus = sv - sc;
            let fb = surplus.max(0.0);
            match self.mech {
                Some(m) => {
                    let o = m.evaluate(&bids, &asks)?;
                    let nf = self.n as f64;
                    let ir = o.x * sv - nf * o.p >= 0.0 && nf * o.r - o.x * sc >= 0.0;
                    tally.push(surplus * o.x, fb, ir);
                }
                None => tally.push(0.0, fb, false),
            }
        }
        Ok(tally)
    }

    /// Combines block tallies (in block order) into a report.
    pub fn finish(&self, tallies: &[Tally]) -> SimReport {
        SimReport::from_tally(&merge_tallies(tallies), self.n, self.seed())
    }

    /// Runs every block on the current thread.
    pub fn run(&self) -> Result<SimReport> {
        let tallies = (0..self.blocks()).map(|b| self.run_block(b)).collect::<Result<Vec<_>>>()?;
        Ok(self.finish(&tallies))
    }
}

/// Monte Carlo first best `E[(Σv − Σc)⁺]`, as `(mean, se)`.
pub fn estimate_fb(values: &Prior, costs: &Prior, n: usize, trials: u64, seed: u64) -> Result<(f64, f64)> {
    let r = Simulation::new(None, values, costs, n, trials, seed)?.run()?;
    Ok((r.fb_mean, r.fb_se))
}

/// GFT, first best, IR probability and efficiency of `mech` under truthful
/// reports.
pub fn estimate_mechanism(
    mech: &MechanismDef,
    values: &Prior,
    costs: &Prior,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    Simulation::new(Some(mech), values, costs, n, trials, seed)?.run()
}

/// Chernoff-style prediction of the IR failure probability of the posted
/// mean mechanism, `exp(−nδ²/(3μ_v)) + exp(−nδ²/(3μ_c))` with
/// `δ = (μ_v − μ_c)/2`, capped at 1. Diagnostic only.
pub fn chernoff_ir_failure(mu_v: f64, mu_c: f64, n: usize) -> f64 {
    let delta = (mu_v - mu_c) / 2.0;
    let nf = n as f64;
    let term = |mu: f64| if mu > 0.0 { libm::exp(-nf * delta * delta / (3.0 * mu)) } else { 0.0 };
    (term(mu_v) + term(mu_c)).min(1.0)
}

/// One row of a first-best scaling probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub fb_mean: f64,
    pub fb_se: f64,
    /// `FB(n)/√n`, bounded when `μ_v ≤ μ_c`.
    pub per_sqrt_n: f64,
    /// `FB(n)/n`, tending to `μ_v − μ_c` when positive.
    pub per_n: f64,
}

/// First best at each market size of an ascending list.
pub fn fb_scaling_probe(values: &Prior, costs: &Prior, ns: &[usize], trials: u64, seed: u64) -> Result<Vec<ScalingRow>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        bail!(Usage, "market sizes must be strictly ascending");
    }
    ns.iter()
        .map(|&n| {
            let (fb_mean, fb_se) = estimate_fb(values, costs, n, trials, seed)?;
            let nf = n as f64;
            Ok(ScalingRow { n, fb_mean, fb_se, per_sqrt_n: fb_mean / libm::sqrt(nf), per_n: fb_mean / nf })
        })
        .collect()
}
