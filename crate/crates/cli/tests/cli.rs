use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mbt_cli::config::ExperimentConfig;
use mbt_cli::experiments::CellRow;
use mbt_cli::output::read_csv;

const HEADER: &str = "distribution,n,mu_f,mu_g,trials,seed,ir_prob,ir_se,efficiency,gft_mean,gft_se,fb_mean,fb_se";

fn mbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbt")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.in.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"distribution": ["bernoulli", "uniform"], "n_list": [5, 20], "trials": 5000,
    "hardness": {"n_list": [2, 3, 10], "trials": 2000},
    "scaling": {"n_list": [10, 40], "trials": 2000}}"#;

#[test]
fn table1_csv_schema_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = mbt(&["--config", &cfg, "--seed", "5", "--out", out.to_str().unwrap(), "table1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("table1.csv")).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# mbt ") && meta.contains("config_sha256=") && meta.ends_with("seed=5"), "{meta}");
    assert_eq!(lines.next().unwrap(), HEADER);
    let rows: Vec<CellRow> = read_csv(&out.join("table1.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert!(rows.iter().all(|r| r.trials == 5000 && r.seed == 5));
    let echo = ExperimentConfig::load(&out.join("config.json")).unwrap();
    assert_eq!(echo.seed, 5);
    assert!(meta.contains(&echo.hash()));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        for cmd in ["table1", "figures", "hardness", "scaling"] {
            let o = mbt(&["--config", &cfg, "--threads", threads, "--out", out.to_str().unwrap(), cmd]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        runs.push(out);
    }
    let mut names: Vec<_> = fs::read_dir(&runs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n.to_str().unwrap().ends_with(".svg")));
    // config.json echoes the output directory and differs by design
    for name in names.into_iter().filter(|n| n != "config.json") {
        assert_eq!(fs::read(runs[0].join(&name)).unwrap(), fs::read(runs[1].join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn hardness_skips_odd_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = mbt(&["--config", &cfg, "--out", out.to_str().unwrap(), "hardness"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("n = 3"));
    let text = fs::read_to_string(out.join("hardness.csv")).unwrap();
    let ns: Vec<_> = text.lines().skip(2).map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(ns, ["2", "10"]);
}

#[test]
fn config_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(mbt(&["--config", missing.to_str().unwrap(), "table1"]).status.code(), Some(2));
    let bad = write_config(dir.path(), r#"{"trials": 0}"#);
    assert_eq!(mbt(&["--config", &bad, "table1"]).status.code(), Some(2));
    let unknown = write_config(dir.path(), r#"{"distribution": "cauchy"}"#);
    assert_eq!(mbt(&["--config", &unknown, "scaling"]).status.code(), Some(2));
    let out = dir.path().join("o");
    assert_eq!(mbt(&["--out", out.to_str().unwrap(), "verify", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn verify_suite_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let o = mbt(&["--out", out, "verify", "--n", "1", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["functions_per_tau"], 6);
    assert_eq!(report["checked"], 18);

    let o = mbt(&["--out", out, "verify", "--n", "1", "--k", "2", "--inject", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("f = 5"));
}

#[test]
fn verify_mechanism_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let good = dir.path().join("voting.json");
    fs::write(&good, r#"{"kind": "voting", "tau": 0.5, "f": {"threshold_m": 2, "arity": 4}}"#).unwrap();
    let o = mbt(&["--out", out, "verify", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", String::from_utf8_lossy(&o.stderr), String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["budget_class"], "SBB");
    assert_eq!(report["ic_regret"], 0.0);

    // trade iff the buyer bids at least 1/2, at price 0.6: not IC
    let bad = dir.path().join("grid.json");
    fs::write(&bad, r#"{"kind": "grid", "grid": {"n": 1, "k": 2, "x": [0, 1, 1, 0, 1, 1, 0, 1, 1]}, "payments": {"posted": 0.6}}"#)
        .unwrap();
    let o = mbt(&["--out", out, "verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, r#"{"kind": "auction"}"#).unwrap();
    assert_eq!(mbt(&["--out", out, "verify", garbage.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn single_bernoulli_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"distribution": "bernoulli", "mu_f": 0.6, "mu_g": 0.4, "n_list": [5]}"#);
    let out = dir.path().join("out");
    let o = mbt(&["--config", &cfg, "--trials", "200000", "--out", out.to_str().unwrap(), "table1"]);
    assert!(o.status.success());
    let rows: Vec<CellRow> = read_csv(&out.join("table1.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    // within 4 standard errors of the reference value
    assert!((rows[0].ir_prob - 0.465557).abs() < 4.0 * rows[0].ir_se, "{}", rows[0].ir_prob);
}

#[test]
fn figure_panels_per_size_and_pair() {
    let dir = tempfile::tempdir().unwrap();
    let by_n = write_config(dir.path(), r#"{"mu_f": 0.55, "mu_g": 0.45, "n_list": [5, 100, 10000], "trials": 200}"#);
    let out = dir.path().join("by_n");
    let o = mbt(&["--config", &by_n, "--out", out.to_str().unwrap(), "figures"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svgs = |dir: &Path| {
        let mut v: Vec<String> = fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".svg"))
            .collect();
        v.sort();
        v
    };
    assert_eq!(svgs(&out), ["figure_n10000_f0p55_g0p45.svg", "figure_n100_f0p55_g0p45.svg", "figure_n5_f0p55_g0p45.svg"]);
    let svg = fs::read_to_string(out.join("figure_n5_f0p55_g0p45.svg")).unwrap();
    for family in ["normal", "uniform", "bernoulli", "mixed"] {
        assert!(svg.contains(family));
    }

    let by_pair = write_config(dir.path(), r#"{"n_list": [100], "trials": 200}"#);
    let out = dir.path().join("by_pair");
    assert!(mbt(&["--config", &by_pair, "--out", out.to_str().unwrap(), "figures"]).status.success());
    assert_eq!(svgs(&out).len(), 3);
}

#[test]
fn empty_size_list_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_list": []}"#);
    let out = dir.path().join("out");
    let o = mbt(&["--config", &cfg, "--out", out.to_str().unwrap(), "figures"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to plot"));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let cfg = write_config(dir.path(), r#"{"distribution": "uniform", "n_list": [5], "trials": 10}"#);
    let out = blocker.join("out");
    let o = mbt(&["--config", &cfg, "--out", out.to_str().unwrap(), "table1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}
