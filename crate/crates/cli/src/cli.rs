//! Command-line parsing and dispatch.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;
use mbt_core::MechanismDef;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments::{figures, table1};
use crate::hardness::hardness;
use crate::output;
use crate::runner::Runner;
use crate::scaling::scaling;
use crate::verify::{run_verify_suite, verify_mechanism};

#[derive(Debug, Parser)]
#[command(name = "mbt", version, about = "Multilateral bilateral trade: simulations, hardness numerics and mechanism checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON experiment configuration; built-in defaults otherwise.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per cell; also overrides the hardness and scaling trial counts.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads, 0 for one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run n = 10000 cells at the full trial count.
    #[arg(long, global = true)]
    pub full: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Posted-mean mechanism over the experiment grid; writes table1.csv.
    Table1,
    /// Figure panels: figures.csv and one SVG per (n, mean pair).
    Figures,
    /// Hardness instance scan over even n; writes hardness.csv.
    #[command(long_about = "Hardness instance scan over even n; writes hardness.csv.\n\n\
Columns: n; fb_clt = sqrt(n/(24 pi)); fb_exact (exact first best, empty for large n); \
fb_mc, fb_mc_se (Monte Carlo first best); trials; seed; tau (best threshold j/n); \
alg_exact (its gains, closed form); alg_sum (same, binomial sum); ratio = alg_exact/fb_clt; \
ratio_exact = alg_exact/fb_exact; randomized_alg (largest gains of a separable randomized \
allocation over witnesses and random profiles); randomized_bound (its analytic bound, at most 1/8). \
Odd n are skipped with a warning.")]
    Hardness,
    /// Check a mechanism definition, or run the exhaustive voting suite.
    Verify(VerifyArgs),
    /// First-best scaling probes; writes scaling.csv.
    Scaling,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Mechanism definition JSON. Without it the exhaustive suite runs.
    pub mechanism: Option<PathBuf>,
    /// Agents per side.
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid resolution; a grid mechanism defaults to its own.
    #[arg(long)]
    pub k: Option<usize>,
    /// Run the exhaustive suite even when a mechanism is given.
    #[arg(long)]
    pub suite: bool,
    /// Extra truth tables (hex, need not be monotone) audited by the suite.
    #[arg(long, num_args = 1..)]
    pub inject: Vec<String>,
}

/// The effective configuration: file or defaults, then flag overrides.
pub fn effective_config(args: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
        cfg.hardness.trials = trials;
        cfg.scaling.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.outputs = out.clone();
    }
    cfg.full |= args.full;
    cfg.validate()?;
    if cfg.hardness.trials == 0 || cfg.scaling.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    Ok(cfg)
}

fn write_json(cfg: &ExperimentConfig, name: &str, value: &impl Serialize) -> Result<String> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    output::ensure_dir(&cfg.outputs)?;
    output::write_file(&cfg.outputs.join(name), format!("{text}\n").as_bytes())?;
    Ok(text)
}

fn verify(cfg: &ExperimentConfig, args: &VerifyArgs) -> Result<()> {
    let mut failed = Vec::new();
    if let Some(path) = &args.mechanism {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let def: MechanismDef =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let report = verify_mechanism(&def, args.n, args.k, cfg.verify.k)?;
        println!("{}", write_json(cfg, "verify.json", &report)?);
        if report["passed"] != true {
            failed.push(format!("{} is not IC or not budget balanced", path.display()));
        }
    }
    if args.mechanism.is_none() || args.suite {
        let n = args.n.unwrap_or(cfg.verify.n);
        let k = args.k.unwrap_or(cfg.verify.k);
        let report = run_verify_suite(n, k, &cfg.verify.taus, &args.inject)?;
        println!("{}", write_json(cfg, "verify_suite.json", &report)?);
        for f in &report.failures {
            failed.push(format!("f = {} at tau = {}: {}", f.f, f.tau, f.reasons.join(", ")));
        }
        for c in report.controls.iter().filter(|c| !c.rejected) {
            failed.push(format!("negative control '{}' was accepted", c.name));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = effective_config(&cli.global)?;
    let runner = Runner::new(cli.global.threads)?;
    info!("seed {}, {} worker threads, config sha256 {}", cfg.seed, runner.threads(), cfg.hash());
    match &cli.command {
        Command::Table1 => println!("{}", table1(&cfg, &runner)?.display()),
        Command::Figures => {
            for path in figures(&cfg, &runner)? {
                println!("{}", path.display());
            }
        }
        Command::Hardness => println!("{}", hardness(&cfg, &runner)?.display()),
        Command::Scaling => println!("{}", scaling(&cfg, &runner)?.display()),
        Command::Verify(args) => verify(&cfg, args)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn parser_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_the_config() {
        let cli = Cli::parse_from(["mbt", "--seed", "7", "--trials", "10", "--out", "x", "--full", "hardness"]);
        let cfg = effective_config(&cli.global).unwrap();
        assert_eq!((cfg.seed, cfg.trials, cfg.hardness.trials, cfg.scaling.trials), (7, 10, 10, 10));
        assert_eq!(cfg.outputs, PathBuf::from("x"));
        assert!(cfg.full);
    }

    #[test]
    fn zero_trials_is_a_config_error() {
        let cli = Cli::parse_from(["mbt", "--trials", "0", "table1"]);
        assert!(matches!(effective_config(&cli.global), Err(CliError::Config(_))));
    }
}
