//! Scans of the hardness instance: uniform values, every cost 1/2.

use std::path::PathBuf;

use log::warn;
use mbt_core::mechanisms::Component;
use mbt_core::metrics::{
    fb_clt_hardness, hardness_alg_sum, hardness_ratio, randomized_hardness_bound, Simulation,
};
use mbt_core::rng::TrialStreams;
use mbt_core::Prior;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::{meta, write_echo};
use crate::output;
use crate::runner::Runner;

/// Most components used for the randomized-bound check of one row.
pub const MAX_RANDOMIZED_AGENTS: usize = 16;

/// Columns of `hardness.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessRow {
    pub n: u64,
    /// Leading-order first best `√(n/24π)`.
    pub fb_clt: f64,
    /// Exact first best (empty beyond the exact-arithmetic limit).
    pub fb_exact: Option<f64>,
    pub fb_mc: f64,
    pub fb_mc_se: f64,
    pub trials: u64,
    pub seed: u64,
    /// Best threshold over `τ = j/n` and its gains.
    pub tau: f64,
    pub alg_exact: f64,
    /// The same gains by the unsimplified binomial sum.
    pub alg_sum: f64,
    /// `alg_exact / fb_clt`.
    pub ratio: f64,
    pub ratio_exact: Option<f64>,
    /// Largest gains of a separable randomized allocation among the
    /// witnesses and random profiles; at most 1/8.
    pub randomized_alg: f64,
    pub randomized_bound: f64,
}

/// The three reference profiles: linear `v/n`, constant, and a steep
/// logistic step at 1/2 of height `1/n`.
pub fn witness_profiles(n: usize) -> Vec<Vec<Component>> {
    let h = 1.0 / n as f64;
    vec![
        vec![Component::linear(h, 0.0); n],
        vec![Component::constant(0.5 * h); n],
        vec![Component::Logistic { height: h, center: 0.5, steepness: 400.0 }; n],
    ]
}

/// A random nondecreasing separable profile of `n` components whose sum
/// stays in `[0, 1]`.
pub fn random_profile(rng: &mut impl Rng, n: usize) -> Vec<Component> {
    let raw: Vec<Component> = (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => Component::Poly { coeffs: (0..4).map(|_| rng.random_range(0.0..1.0)).collect() },
            1 => Component::Logistic {
                height: rng.random_range(0.1..1.0),
                center: rng.random_range(0.0..1.0),
                steepness: rng.random_range(0.5..60.0),
            },
            _ => {
                let mut level = rng.random_range(0.0..0.3);
                let values = (0..rng.random_range(2..8))
                    .map(|_| {
                        level += rng.random_range(0.0..0.5);
                        level
                    })
                    .collect();
                Component::Table { values }
            }
        })
        .collect();
    let top: f64 = raw.iter().map(|c| c.value(1.0)).sum();
    let scale = rng.random_range(0.2..1.0) / top;
    raw.into_iter().map(|c| scale_component(c, scale)).collect()
}

fn scale_component(c: Component, s: f64) -> Component {
    match c {
        Component::Poly { coeffs } => Component::Poly { coeffs: coeffs.into_iter().map(|a| a * s).collect() },
        Component::Logistic { height, center, steepness } => Component::Logistic { height: height * s, center, steepness },
        Component::Table { values } => Component::Table { values: values.into_iter().map(|v| v * s).collect() },
    }
}

/// Largest gains over the witnesses and `random` seeded random profiles.
pub fn randomized_scan(n: usize, random: usize, seed: u64) -> Result<(f64, f64)> {
    let agents = n.clamp(1, MAX_RANDOMIZED_AGENTS);
    let mut rng = TrialStreams::new(seed).stream(n as u64);
    let mut profiles = witness_profiles(agents);
    profiles.extend((0..random).map(|_| random_profile(&mut rng, agents)));
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for p in &profiles {
        let b = randomized_hardness_bound(p)?;
        if b.alg > worst.0 {
            worst = (b.alg, b.bound);
        }
    }
    Ok(worst)
}

pub fn hardness_row(cfg: &ExperimentConfig, n: u64, runner: &Runner) -> Result<HardnessRow> {
    let ratio = hardness_ratio(n)?;
    let values = Prior::uniform(0.5, 0.5)?;
    let costs = Prior::point(0.5)?;
    let trials = cfg.hardness.trials;
    let sim = Simulation::new(None, &values, &costs, n as usize, trials, cfg.seed)?;
    let fb = runner.simulate(&sim)?;
    let (randomized_alg, randomized_bound) = randomized_scan(n as usize, cfg.hardness.random_profiles, cfg.seed)?;
    Ok(HardnessRow {
        n,
        fb_clt: fb_clt_hardness(n as f64),
        fb_exact: ratio.fb_exact,
        fb_mc: fb.fb_mean,
        fb_mc_se: fb.fb_se,
        trials,
        seed: cfg.seed,
        tau: ratio.tau,
        alg_exact: ratio.alg,
        alg_sum: hardness_alg_sum(n, ratio.tau)?,
        ratio: ratio.ratio,
        ratio_exact: ratio.ratio_exact,
        randomized_alg,
        randomized_bound,
    })
}

pub fn hardness(cfg: &ExperimentConfig, runner: &Runner) -> Result<PathBuf> {
    output::ensure_dir(&cfg.outputs)?;
    let mut rows = Vec::new();
    for &n in &cfg.hardness.n_list {
        if n == 0 || n % 2 != 0 {
            warn!("skipping n = {n}: the hardness scan needs an even n");
            continue;
        }
        rows.push(hardness_row(cfg, n, runner)?);
    }
    let path = cfg.outputs.join("hardness.csv");
    output::write_csv(&path, &meta(cfg), &rows)?;
    write_echo(cfg, &cfg.outputs)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_profiles_are_valid() {
        let mut rng = TrialStreams::new(1).stream(0);
        for n in [1, 3, 10] {
            for _ in 0..20 {
                let p = random_profile(&mut rng, n);
                let b = randomized_hardness_bound(&p).unwrap();
                assert!(b.alg <= b.bound + 1e-6 && b.bound <= 0.125 + 1e-6);
            }
        }
    }

    #[test]
    fn small_rows() {
        let cfg = ExperimentConfig { hardness: crate::config::HardnessConfig { trials: 2000, ..Default::default() }, ..Default::default() };
        let runner = Runner::new(1).unwrap();
        let row = hardness_row(&cfg, 2, &runner).unwrap();
        assert_eq!(row.tau, 0.5);
        assert!((row.alg_exact - 0.125).abs() < 1e-15);
        assert!((row.fb_exact.unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(row.randomized_alg <= 0.125 + 1e-6);
    }
}
