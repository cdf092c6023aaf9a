//! The `table1` and `figures` subcommands: the posted-mean mechanism over
//! the experiment grid.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use mbt_core::metrics::{chernoff_ir_failure, SimReport, Simulation};
use mbt_core::MechanismDef;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentConfig};
use crate::error::Result;
use crate::output::{self, Bar, Meta};
use crate::runner::Runner;

/// One CSV row per experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub distribution: String,
    pub n: usize,
    pub mu_f: f64,
    pub mu_g: f64,
    pub trials: u64,
    pub seed: u64,
    pub ir_prob: f64,
    pub ir_se: f64,
    /// Empty when the first best is zero.
    pub efficiency: Option<f64>,
    pub gft_mean: f64,
    pub gft_se: f64,
    pub fb_mean: f64,
    pub fb_se: f64,
    #[serde(skip)]
    pub efficiency_se: Option<f64>,
}

impl CellRow {
    fn new(cell: &Cell, r: &SimReport) -> Self {
        CellRow {
            distribution: cell.family.name().to_string(),
            n: cell.n,
            mu_f: cell.mu_f,
            mu_g: cell.mu_g,
            trials: r.trials,
            seed: r.seed,
            ir_prob: r.ir_prob,
            ir_se: r.ir_se,
            efficiency: r.efficiency,
            gft_mean: r.gft_mean,
            gft_se: r.gft_se,
            fb_mean: r.fb_mean,
            fb_se: r.fb_se,
            efficiency_se: r.efficiency_se,
        }
    }
}

/// Simulates one cell with the forced-trade mechanism posted at the prior
/// means.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell, runner: &Runner) -> Result<CellRow> {
    let values = cell.family.prior(cell.mu_f, cfg.sigma, cfg.radius)?;
    let costs = cell.family.prior(cell.mu_g, cfg.sigma, cfg.radius)?;
    let mech = MechanismDef::forced_from_priors(&values, &costs);
    let sim = Simulation::new(Some(&mech), &values, &costs, cell.n, cell.trials, cfg.seed)?;
    let report = runner.simulate(&sim)?;
    let row = CellRow::new(cell, &report);
    info!(
        "{:<9} n={:<6} ({}, {}) trials={} ir={:.6} eff={} chernoff_fail<={:.3e}",
        row.distribution,
        row.n,
        row.mu_f,
        row.mu_g,
        row.trials,
        row.ir_prob,
        row.efficiency.map_or("undefined".into(), |e| format!("{e:.6}")),
        chernoff_ir_failure(values.mean(), costs.mean(), cell.n)
    );
    Ok(row)
}

pub fn run_cells(cfg: &ExperimentConfig, runner: &Runner) -> Result<Vec<CellRow>> {
    cfg.cells()?.iter().map(|c| run_cell(cfg, c, runner)).collect()
}

pub fn meta(cfg: &ExperimentConfig) -> Meta {
    Meta { config_hash: cfg.hash(), seed: cfg.seed }
}

/// Writes the config echo next to the outputs.
pub fn write_echo(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    output::write_file(&dir.join("config.json"), cfg.echo().as_bytes())
}

pub fn table1(cfg: &ExperimentConfig, runner: &Runner) -> Result<PathBuf> {
    output::ensure_dir(&cfg.outputs)?;
    let rows = run_cells(cfg, runner)?;
    let path = cfg.outputs.join("table1.csv");
    output::write_csv(&path, &meta(cfg), &rows)?;
    write_echo(cfg, &cfg.outputs)?;
    Ok(path)
}

fn mu_tag(mu: f64) -> String {
    format!("{mu}").replace('.', "p")
}

/// Grouped IR/efficiency charts, one per (n, mean pair), plus their CSV.
pub fn figures(cfg: &ExperimentConfig, runner: &Runner) -> Result<Vec<PathBuf>> {
    if cfg.n_list.is_empty() || cfg.pairs().is_empty() {
        warn!("nothing to plot: the config has no market sizes or mean pairs");
        return Ok(Vec::new());
    }
    output::ensure_dir(&cfg.outputs)?;
    let rows = run_cells(cfg, runner)?;
    let meta = meta(cfg);
    let mut written = vec![cfg.outputs.join("figures.csv")];
    output::write_csv(&written[0], &meta, &rows)?;

    let mut panels: BTreeMap<(usize, String, String), Vec<&CellRow>> = BTreeMap::new();
    for r in &rows {
        panels.entry((r.n, mu_tag(r.mu_f), mu_tag(r.mu_g))).or_default().push(r);
    }
    for ((n, tf, tg), cells) in panels {
        let title = format!("n = {n}, mu_F = {}, mu_G = {}", cells[0].mu_f, cells[0].mu_g);
        let groups: Vec<(String, Vec<Bar>)> = cells
            .iter()
            .map(|r| {
                let (eff, eff_se) = (r.efficiency.unwrap_or(0.0), r.efficiency_se.unwrap_or(0.0));
                (r.distribution.clone(), vec![Bar { value: r.ir_prob, se: r.ir_se }, Bar { value: eff, se: eff_se }])
            })
            .collect();
        let svg = output::grouped_bars_svg(&meta, &title, &["IR probability", "efficiency"], &groups);
        let path = cfg.outputs.join(format!("figure_n{n}_f{tf}_g{tg}.svg"));
        output::write_file(&path, svg.as_bytes())?;
        written.push(path);
    }
    write_echo(cfg, &cfg.outputs)?;
    Ok(written)
}
