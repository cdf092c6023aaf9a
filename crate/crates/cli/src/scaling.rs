//! First-best scaling probes.

use std::path::PathBuf;

use mbt_core::metrics::Simulation;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments::{meta, write_echo};
use crate::output;
use crate::runner::Runner;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub distribution: String,
    pub mu_f: f64,
    pub mu_g: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub fb_mean: f64,
    pub fb_se: f64,
    /// `FB(n)/√n`.
    pub fb_per_sqrt_n: f64,
    /// `FB(n)/n`.
    pub fb_per_n: f64,
}

pub fn scaling_rows(cfg: &ExperimentConfig, runner: &Runner) -> Result<Vec<ScalingRow>> {
    let sc = &cfg.scaling;
    if sc.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("scaling n_list must be strictly ascending".into()));
    }
    let mut rows = Vec::new();
    for case in &sc.cases {
        let values = case.values.build()?;
        let costs = case.costs.build()?;
        for &n in &sc.n_list {
            let sim = Simulation::new(None, &values, &costs, n, sc.trials, cfg.seed)?;
            let r = runner.simulate(&sim)?;
            let nf = n as f64;
            rows.push(ScalingRow {
                distribution: case.label.clone(),
                mu_f: values.mean(),
                mu_g: costs.mean(),
                n,
                trials: r.trials,
                seed: cfg.seed,
                fb_mean: r.fb_mean,
                fb_se: r.fb_se,
                fb_per_sqrt_n: r.fb_mean / nf.sqrt(),
                fb_per_n: r.fb_mean / nf,
            });
        }
    }
    Ok(rows)
}

pub fn scaling(cfg: &ExperimentConfig, runner: &Runner) -> Result<PathBuf> {
    output::ensure_dir(&cfg.outputs)?;
    let rows = scaling_rows(cfg, runner)?;
    let path = cfg.outputs.join("scaling.csv");
    output::write_csv(&path, &meta(cfg), &rows)?;
    write_echo(cfg, &cfg.outputs)?;
    Ok(path)
}
