//! Mechanisms for multiplayer bilateral trade.
//!
//! A mechanism maps the sealed bids of `n` buyers and asks of `n` sellers to
//! a shared outcome `(x, p, r)`: trade probability, payment of every buyer,
//! receipt of every seller.

mod boolfn;
pub mod grid;
mod myerson;
mod separable;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::priors::Prior;

pub use boolfn::{threshold_count_f, MonotoneBoolFn, MAX_TABLE_ARITY};
pub use grid::{GridAllocation, GridPayments, GridSpace};
pub use myerson::{myerson_buyer_payment, myerson_seller_receipt, StepSlice};
pub(crate) use myerson::step_integral;
pub use separable::{separable_allocation, Component, SeparableDef};

/// One realized market: `n` buyer bids and `n` seller asks in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    bids: Vec<f64>,
    asks: Vec<f64>,
}

impl Profile {
    pub fn new(bids: Vec<f64>, asks: Vec<f64>) -> Result<Self> {
        if bids.is_empty() || bids.len() != asks.len() {
            bail!(Usage, "profile needs n >= 1 bids and asks, got {} and {}", bids.len(), asks.len());
        }
        if let Some(v) = bids.iter().chain(&asks).find(|v| !(0.0..=1.0).contains(*v)) {
            bail!(Usage, "report {v} outside [0, 1]");
        }
        Ok(Self { bids, asks })
    }

    pub fn n(&self) -> usize {
        self.bids.len()
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn asks(&self) -> &[f64] {
        &self.asks
    }
}

/// Shared trade decision `x ∈ [0, 1]`, buyer payment `p`, seller receipt `r`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Outcome {
    pub x: f64,
    pub p: f64,
    pub r: f64,
}

impl Outcome {
    pub const NO_TRADE: Outcome = Outcome { x: 0.0, p: 0.0, r: 0.0 };

    /// Utility of a buyer with value `v`: `x·v − p`.
    pub fn buyer_utility(&self, v: f64) -> f64 {
        self.x * v - self.p
    }

    /// Utility of a seller with cost `c`: `r − x·c`.
    pub fn seller_utility(&self, c: f64) -> f64 {
        self.r - self.x * c
    }
}

/// Posted-mean forced trade: trade iff `mu_v > mu_c`, at the midpoint price.
/// The outcome ignores the reports entirely.
pub fn forced_trade(mu_v: f64, mu_c: f64, _profile: &Profile) -> Outcome {
    forced_outcome(mu_v, mu_c)
}

fn forced_outcome(mu_v: f64, mu_c: f64) -> Outcome {
    if mu_v > mu_c {
        let price = 0.5 * (mu_v + mu_c);
        Outcome { x: 1.0, p: price, r: price }
    } else {
        Outcome::NO_TRADE
    }
}

/// Trade decision of the voting mechanism with threshold `tau` and
/// aggregator `f`: `f(1{b_1 ≥ τ}, …, 1{b_n ≥ τ}, 1{a_1 ≤ τ}, …, 1{a_n ≤ τ})`.
/// A report equal to `tau` votes for trade.
pub fn voting_allocation(tau: f64, f: &MonotoneBoolFn, profile: &Profile) -> Result<bool> {
    voting_decision(tau, f, profile.bids(), profile.asks())
}

pub(crate) fn voting_decision(tau: f64, f: &MonotoneBoolFn, bids: &[f64], asks: &[f64]) -> Result<bool> {
    let votes = bids.len() + asks.len();
    f.check_arity(votes)?;
    let bits = bids.iter().map(|b| *b >= tau).chain(asks.iter().map(|a| *a <= tau));
    Ok(f.eval_bits(bits))
}

/// Voting mechanism outcome: `x` from [`voting_allocation`], `p = r = τ·x`.
pub fn voting_outcome(tau: f64, f: &MonotoneBoolFn, profile: &Profile) -> Result<Outcome> {
    let x = if voting_allocation(tau, f, profile)? { 1.0 } else { 0.0 };
    Ok(Outcome { x, p: tau * x, r: tau * x })
}

/// Serializable mechanism description:
/// `{"kind": "forced" | "voting" | "grid" | "separable", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MechanismDef {
    /// Trade iff `mu_v > mu_c` at price `(mu_v + mu_c) / 2`.
    Forced { mu_v: f64, mu_c: f64 },
    /// Threshold-vote mechanism with `p = r = τ·x`.
    Voting { tau: f64, f: MonotoneBoolFn },
    /// Tabulated allocation; reports are snapped to the nearest grid point.
    /// Without payments no money changes hands.
    Grid {
        grid: GridAllocation,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        payments: Option<GridPayments>,
    },
    /// Separable randomized allocation with envelope payments.
    Separable(SeparableDef),
}

impl MechanismDef {
    /// Forced trade posted at the means of the value and cost priors.
    pub fn forced_from_priors(values: &Prior, costs: &Prior) -> Self {
        MechanismDef::Forced { mu_v: values.mean(), mu_c: costs.mean() }
    }

    pub fn voting(tau: f64, f: MonotoneBoolFn) -> Self {
        MechanismDef::Voting { tau, f }
    }

    /// Checks the mechanism can be evaluated on markets with `n` agents per
    /// side.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            bail!(Usage, "markets need n >= 1");
        }
        match self {
            MechanismDef::Forced { mu_v, mu_c } => {
                if !(mu_v.is_finite() && mu_c.is_finite()) {
                    bail!(Usage, "forced-trade means must be finite");
                }
            }
            MechanismDef::Voting { tau, f } => {
                if !(0.0..=1.0).contains(tau) {
                    bail!(Usage, "voting threshold {tau} outside [0, 1]");
                }
                f.check_arity(2 * n)?;
            }
            MechanismDef::Grid { grid, payments } => {
                if grid.n() != n {
                    bail!(Usage, "grid mechanism is for n = {}, not {n}", grid.n());
                }
                if let Some(pay) = payments {
                    pay.validate(grid.values().len())?;
                }
            }
            MechanismDef::Separable(def) => {
                if def.n() != n {
                    bail!(Usage, "separable mechanism is for n = {}, not {n}", def.n());
                }
                def.validate()?;
            }
        }
        Ok(())
    }

    /// True when the outcome does not depend on the reports.
    pub fn is_report_independent(&self) -> bool {
        matches!(self, MechanismDef::Forced { .. })
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            MechanismDef::Forced { .. } | MechanismDef::Voting { .. } => true,
            MechanismDef::Grid { grid, .. } => grid.is_deterministic(),
            MechanismDef::Separable(_) => false,
        }
    }

    pub fn outcome(&self, profile: &Profile) -> Result<Outcome> {
        self.evaluate(profile.bids(), profile.asks())
    }

    /// Outcome on raw report slices. Lengths must agree; reports are not
    /// re-validated here.
    pub fn evaluate(&self, bids: &[f64], asks: &[f64]) -> Result<Outcome> {
        if bids.len() != asks.len() {
            bail!(Usage, "{} bids but {} asks", bids.len(), asks.len());
        }
        match self {
            MechanismDef::Forced { mu_v, mu_c } => Ok(forced_outcome(*mu_v, *mu_c)),
            MechanismDef::Voting { tau, f } => {
                let x = if voting_decision(*tau, f, bids, asks)? { 1.0 } else { 0.0 };
                Ok(Outcome { x, p: tau * x, r: tau * x })
            }
            MechanismDef::Grid { grid, payments } => {
                let idx = grid.lookup_index(bids, asks)?;
                let x = grid.values()[idx];
                let (p, r) = payments.as_ref().map_or((0.0, 0.0), |pay| pay.at(idx, x));
                Ok(Outcome { x, p, r })
            }
            MechanismDef::Separable(def) => {
                let x = def.allocation(bids, asks)?;
                Ok(Outcome { x, p: def.payment(bids), r: def.receipt(asks) })
            }
        }
    }

    /// Trade probability only.
    pub fn allocation(&self, bids: &[f64], asks: &[f64]) -> Result<f64> {
        match self {
            MechanismDef::Separable(def) => def.allocation(bids, asks),
            _ => Ok(self.evaluate(bids, asks)?.x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn profile(bids: &[f64], asks: &[f64]) -> Profile {
        Profile::new(bids.to_vec(), asks.to_vec()).unwrap()
    }

    #[test]
    fn forced_trade_examples() {
        let any = profile(&[0.1, 0.9], &[0.7, 0.2]);
        assert_eq!(forced_trade(0.6, 0.4, &any), Outcome { x: 1.0, p: 0.5, r: 0.5 });
        assert_eq!(forced_trade(0.5, 0.5, &any), Outcome::NO_TRADE);
        let o = forced_trade(0.51, 0.49, &any);
        assert_eq!(o.x, 1.0);
        assert!((o.p - 0.5).abs() < 1e-15 && o.p == o.r);
    }

    #[test]
    fn voting_allocation_examples() {
        let and = MonotoneBoolFn::and(4);
        assert!(voting_allocation(0.5, &and, &profile(&[0.6, 0.7], &[0.3, 0.4])).unwrap());
        assert!(!voting_allocation(0.5, &and, &profile(&[0.6, 0.4], &[0.3, 0.4])).unwrap());
        let three = threshold_count_f(4, 3).unwrap();
        assert!(voting_allocation(0.5, &three, &profile(&[0.6, 0.4], &[0.3, 0.4])).unwrap());
        // the same aggregator as an explicit table
        let table = MonotoneBoolFn::from_fn(4, |m| m.count_ones() >= 3).unwrap();
        assert!(voting_allocation(0.5, &table, &profile(&[0.6, 0.4], &[0.3, 0.4])).unwrap());
    }

    #[test]
    fn ties_vote_for_trade() {
        let and = MonotoneBoolFn::and(2);
        assert!(voting_allocation(0.5, &and, &profile(&[0.5], &[0.5])).unwrap());
    }

    #[test]
    fn voting_outcome_prices_at_tau() {
        let and = MonotoneBoolFn::and(2);
        let o = voting_outcome(0.5, &and, &profile(&[0.9], &[0.1])).unwrap();
        assert_eq!((o.x, o.p, o.r), (1.0, 0.5, 0.5));
        let o = voting_outcome(0.7, &and, &profile(&[0.6], &[0.1])).unwrap();
        assert_eq!(o, Outcome::NO_TRADE);
        let o = voting_outcome(0.3, &and, &profile(&[0.6], &[0.1])).unwrap();
        assert_eq!((o.x, o.p, o.r), (1.0, 0.3, 0.3));
    }

    #[test]
    fn arity_mismatch_is_a_usage_error() {
        let and = MonotoneBoolFn::and(4);
        let err = voting_allocation(0.5, &and, &profile(&[0.6], &[0.3])).unwrap_err();
        assert!(matches!(err, crate::Error::Usage(_)));
        assert!(MechanismDef::voting(0.5, and).validate(1).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(Profile::new(vec![0.5], vec![]).is_err());
        assert!(Profile::new(vec![1.5], vec![0.5]).is_err());
        assert!(Profile::new(vec![], vec![]).is_err());
    }

    #[test]
    fn mechanism_json_forms() {
        let json = r#"{"kind":"voting","tau":0.5,"f":{"threshold_m":3}}"#;
        let m: MechanismDef = serde_json::from_str(json).unwrap();
        m.validate(2).unwrap();
        let o = m.outcome(&profile(&[0.6, 0.4], &[0.3, 0.4])).unwrap();
        assert_eq!(o.x, 1.0);

        let forced: MechanismDef = serde_json::from_str(r#"{"kind":"forced","mu_v":0.6,"mu_c":0.4}"#).unwrap();
        assert_eq!(forced, MechanismDef::Forced { mu_v: 0.6, mu_c: 0.4 });

        let grid = r#"{"kind":"grid","grid":{"n":1,"k":1,"x":[0,1,0,0]},"payments":{"posted":0.5}}"#;
        let g: MechanismDef = serde_json::from_str(grid).unwrap();
        g.validate(1).unwrap();
        assert_eq!(g.evaluate(&[1.0], &[0.0]).unwrap(), Outcome { x: 1.0, p: 0.5, r: 0.5 });
        let tables = r#"{"kind":"grid","grid":{"n":1,"k":1,"x":[0,1,0,0]},"payments":{"p":[0,0.6,0,0],"r":[0,0.5,0,0]}}"#;
        let t: MechanismDef = serde_json::from_str(tables).unwrap();
        assert_eq!(t.evaluate(&[1.0], &[0.0]).unwrap(), Outcome { x: 1.0, p: 0.6, r: 0.5 });

        let sep = r#"{"kind":"separable","buyer":[{"type":"poly","coeffs":[0,0.5]}],"seller":[{"type":"poly","coeffs":[0.5,-0.5]}]}"#;
        let s: MechanismDef = serde_json::from_str(sep).unwrap();
        s.validate(1).unwrap();
        assert!((s.allocation(&[0.6], &[0.2]).unwrap() - 0.7).abs() < 1e-15);

        for m in [m, forced, g, t, s] {
            let back: MechanismDef = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }
}
