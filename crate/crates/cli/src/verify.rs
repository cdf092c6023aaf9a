//! Mechanism reports and the exhaustive voting-mechanism suite.

use log::info;
use mbt_core::mechanisms::{GridAllocation, GridPayments, MAX_TABLE_ARITY};
use mbt_core::verification::{
    check_budget, check_ic, check_monotone, check_myerson_identity, check_separability, check_two_sided_conformance,
    check_voting_conformance, enumerate_monotone_bool, BudgetClass, SeparabilityOptions, SweepOptions,
};
use mbt_core::{MechanismDef, MonotoneBoolFn};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result};

/// Largest sizes the suite enumerates.
pub const SUITE_MAX_N: usize = 2;
pub const SUITE_MAX_K: usize = 4;

/// Myerson-identity deviations at or below this count as zero.
pub const MYERSON_TOL: f64 = 1e-9;

/// Agents per side the mechanism is built for, if it says.
fn inferred_n(def: &MechanismDef) -> Option<usize> {
    match def {
        MechanismDef::Voting { f, .. } => f.arity().filter(|a| a % 2 == 0).map(|a| a / 2),
        MechanismDef::Grid { grid, .. } => Some(grid.n()),
        MechanismDef::Separable(s) => Some(s.n()),
        MechanismDef::Forced { .. } => None,
    }
}

/// Full report on one mechanism. `n` is required only when the definition
/// does not fix it. The resolution defaults to a grid mechanism's own `K`,
/// else to `default_k`.
pub fn verify_mechanism(def: &MechanismDef, n: Option<usize>, k: Option<usize>, default_k: usize) -> Result<Value> {
    let k = match (k, def) {
        (Some(k), _) => k,
        (None, MechanismDef::Grid { grid, .. }) => grid.k(),
        (None, _) => default_k,
    };
    let n = match (inferred_n(def), n) {
        (Some(m), Some(n)) if m != n => {
            return Err(CliError::Config(format!("mechanism is for n = {m}, but --n {n} was given")))
        }
        (Some(m), _) => m,
        (None, Some(n)) => n,
        (None, None) => 2,
    };
    def.validate(n)?;
    let opts = SweepOptions::default();
    let ic = check_ic(def, n, k, &opts)?;
    let budget = check_budget(def, n, k, &opts)?;
    let myerson = check_myerson_identity(def, n, k, &opts)?;

    let tabulated = GridAllocation::tabulate(n, k, |b, a| def.allocation(b, a).unwrap_or(f64::NAN)).ok();
    let monotone = tabulated.as_ref().map(check_monotone);
    let conformance = match &tabulated {
        Some(g) if g.is_deterministic() && 2 * n <= MAX_TABLE_ARITY => {
            let voting = check_voting_conformance(g)?;
            let two_sided = check_two_sided_conformance(g)?;
            json!({ "voting": voting, "two_sided": two_sided })
        }
        _ => Value::Null,
    };
    let separability = match def {
        MechanismDef::Separable(s) => {
            serde_json::to_value(check_separability(|b, a| s.allocation(b, a), n, &SeparabilityOptions::default())?)
                .expect("report serializes")
        }
        _ => Value::Null,
    };
    let passed = ic.is_ic() && budget.class != BudgetClass::Neither;
    Ok(json!({
        "n": n,
        "k": k,
        "ic_regret": ic.max_regret,
        "ic": ic,
        "budget_class": budget.class.name(),
        "budget": budget,
        "myerson_dev": myerson.max_deviation,
        "myerson": myerson,
        "monotone": monotone,
        "conformance": conformance,
        "separability": separability,
        "passed": passed,
    }))
}

/// A truth table on `arity` inputs that need not be monotone, bit `mask`
/// holding `f(mask)`.
fn parse_table(arity: usize, hex: &str) -> Result<u64> {
    let digits = hex.strip_prefix("0x").unwrap_or(hex);
    let word = u64::from_str_radix(digits, 16).map_err(|e| CliError::Config(format!("bad truth table {hex:?}: {e}")))?;
    if arity < 6 && word >> (1u32 << arity) != 0 {
        return Err(CliError::Config(format!("truth table {hex:?} has more than 2^{arity} entries")));
    }
    Ok(word)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteFailure {
    /// Truth table in hex, bit `mask` holding `f(mask)`.
    pub f: String,
    pub tau: f64,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlResult {
    pub name: &'static str,
    pub rejected: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub n: usize,
    pub k: usize,
    pub taus: Vec<f64>,
    /// Thresholds on the grid, where the Myerson identity is also checked.
    pub myerson_taus: Vec<f64>,
    pub functions_per_tau: usize,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<SuiteFailure>,
    pub controls: Vec<ControlResult>,
    pub ok: bool,
}

/// Reasons the voting-style mechanism `(τ, table)` fails: nonzero regret,
/// budget other than SBB, no voting conformance, or (when `τ` is a grid
/// point) a Myerson mismatch. Off the grid the critical value is only
/// determined up to a cell, so the identity is not checked there.
fn audit(n: usize, k: usize, tau: f64, word: u64) -> Result<Vec<String>> {
    let grid = GridAllocation::tabulate(n, k, |b, a| {
        let mask = b.iter().map(|v| *v >= tau).chain(a.iter().map(|c| *c <= tau)).enumerate()
            .fold(0u64, |m, (i, bit)| m | (bit as u64) << i);
        ((word >> mask) & 1) as f64
    })?;
    let conformance = check_voting_conformance(&grid)?;
    let def = MechanismDef::Grid { grid, payments: Some(GridPayments::Posted { posted: tau }) };
    let opts = SweepOptions::default();
    let ic = check_ic(&def, n, k, &opts)?;
    let budget = check_budget(&def, n, k, &opts)?;
    let myerson = check_myerson_identity(&def, n, k, &opts)?;
    let mut reasons = Vec::new();
    if !ic.is_ic() {
        reasons.push(format!("IC regret {:.3e}", ic.max_regret));
    }
    if budget.class != BudgetClass::Sbb {
        reasons.push(format!("budget {}", budget.class.name()));
    }
    if on_grid(tau, k) && myerson.max_deviation > MYERSON_TOL {
        reasons.push(format!("Myerson deviation {:.3e}", myerson.max_deviation));
    }
    if !conformance.conforms {
        reasons.push("no threshold-vote representation".into());
    }
    Ok(reasons)
}

fn on_grid(tau: f64, k: usize) -> bool {
    let t = tau * k as f64;
    (t - t.round()).abs() < 1e-12
}

fn table_hex(arity: usize, word: u64) -> String {
    let digits = ((1usize << arity) / 4).max(1);
    format!("{word:0digits$x}")
}

/// The allocation `1{b₁ ≥ 1/4 and b₂ ≥ 3/4}` and a voting mechanism whose
/// first buyer pays an extra `0.01·b₁`. Both must be rejected.
fn negative_controls() -> Result<Vec<ControlResult>> {
    let (n, k) = (2, 4);
    let opts = SweepOptions::default();
    let two = GridAllocation::tabulate(n, k, |b, _| if b[0] >= 0.25 && b[1] >= 0.75 { 1.0 } else { 0.0 })?;
    let conf = check_voting_conformance(&two)?;
    let two_control = ControlResult {
        name: "two-threshold allocation",
        rejected: !conf.conforms,
        detail: match &conf.witness {
            Some(w) => format!("reports {:?} and {:?} vote alike at tau {} but trade differs", w.first, w.second, w.tau),
            None => "conforms".into(),
        },
    };

    let tau = 0.5;
    let f = MonotoneBoolFn::threshold(2 * n, 3)?;
    let voting = MechanismDef::voting(tau, f);
    let grid = GridAllocation::tabulate(n, k, |b, a| voting.allocation(b, a).unwrap_or(f64::NAN))?;
    let space = grid.space();
    let mut coords = vec![0u32; space.dims()];
    let (mut p, mut r) = (Vec::new(), Vec::new());
    for x in grid.values() {
        p.push(tau * x + 0.01 * space.point(coords[0]));
        r.push(tau * x);
        space.advance(&mut coords);
    }
    let perturbed = MechanismDef::Grid { grid, payments: Some(GridPayments::Tables { p, r }) };
    let my = check_myerson_identity(&perturbed, n, k, &opts)?;
    let ic = check_ic(&perturbed, n, k, &opts)?;
    let pay_control = ControlResult {
        name: "perturbed payment",
        rejected: my.max_deviation > MYERSON_TOL || !ic.is_ic(),
        detail: format!("Myerson deviation {:.3e}, IC regret {:.3e}", my.max_deviation, ic.max_regret),
    };
    Ok(vec![two_control, pay_control])
}

/// Audits every monotone aggregator on `2n` votes at every threshold in
/// `taus`, plus the `inject`ed truth tables (which may be non-monotone),
/// and runs the negative controls.
pub fn run_verify_suite(n: usize, k: usize, taus: &[f64], inject: &[String]) -> Result<SuiteReport> {
    if n == 0 || k == 0 || n > SUITE_MAX_N || k > SUITE_MAX_K {
        return Err(CliError::Config(format!(
            "suite needs 1 <= n <= {SUITE_MAX_N} and 1 <= K <= {SUITE_MAX_K}, got n = {n}, K = {k}"
        )));
    }
    if taus.is_empty() || taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(CliError::Config("suite thresholds must be a nonempty list in [0, 1]".into()));
    }
    let arity = 2 * n;
    let mut tables: Vec<u64> = enumerate_monotone_bool(arity)?
        .iter()
        .map(|f| (0..1u64 << arity).fold(0u64, |w, m| w | (f.eval_mask(m) as u64) << m))
        .collect();
    let functions_per_tau = tables.len();
    for hex in inject {
        tables.push(parse_table(arity, hex)?);
    }

    let mut failures = Vec::new();
    let mut checked = 0;
    for &tau in taus {
        for &word in &tables {
            checked += 1;
            let reasons = audit(n, k, tau, word)?;
            if !reasons.is_empty() {
                failures.push(SuiteFailure { f: table_hex(arity, word), tau, reasons });
            }
        }
    }
    let controls = negative_controls()?;
    let failed = failures.len();
    let ok = failed == 0 && controls.iter().all(|c| c.rejected);
    info!("suite n = {n}, K = {k}: {checked} checked, {failed} failed");
    Ok(SuiteReport {
        n,
        k,
        taus: taus.to_vec(),
        myerson_taus: taus.iter().copied().filter(|t| on_grid(*t, k)).collect(),
        functions_per_tau,
        checked,
        passed: checked - failed,
        failed,
        failures,
        controls,
        ok,
    })
}
