use serde::{Deserialize, Serialize};

use super::{Sweep, SweepOptions};
use crate::error::Result;
use crate::mechanisms::{GridSpace, MechanismDef};

/// `|p − r|` at or below this counts as balanced.
pub const SBB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetClass {
    /// `p = r` on every profile.
    Sbb,
    /// `p ≥ r` on every profile, with a strict surplus somewhere.
    Wbb,
    Neither,
}

impl BudgetClass {
    pub fn name(self) -> &'static str {
        match self {
            BudgetClass::Sbb => "SBB",
            BudgetClass::Wbb => "WBB",
            BudgetClass::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub class: BudgetClass,
    /// `max |p − r|`.
    pub worst_gap: f64,
    /// `max (r − p)`, positive when the mechanism runs a deficit somewhere.
    pub max_deficit: f64,
    /// `max (p − r)`.
    pub max_surplus: f64,
    pub profiles_checked: u64,
    pub sampled: bool,
}

/// Classifies the per-profile budget `p − r` over the report grid.
pub fn check_budget(mech: &MechanismDef, n: usize, k: usize, opts: &SweepOptions) -> Result<BudgetReport> {
    mech.validate(n)?;
    let space = GridSpace::new(n, k)?;
    let mut sweep = Sweep::new(space, opts);
    let (mut bids, mut asks) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let (mut deficit, mut surplus, mut checked) = (0.0f64, 0.0f64, 0u64);
    let sampled = sweep.sampled();
    while let Some(coords) = sweep.next_coords() {
        space.fill(coords, &mut bids, &mut asks);
        let o = mech.evaluate(&bids, &asks)?;
        deficit = deficit.max(o.r - o.p);
        surplus = surplus.max(o.p - o.r);
        checked += 1;
    }
    let class = if deficit <= SBB_TOL && surplus <= SBB_TOL {
        BudgetClass::Sbb
    } else if deficit <= SBB_TOL {
        BudgetClass::Wbb
    } else {
        BudgetClass::Neither
    };
    Ok(BudgetReport {
        class,
        worst_gap: deficit.max(surplus),
        max_deficit: deficit,
        max_surplus: surplus,
        profiles_checked: checked,
        sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{threshold_count_f, GridAllocation, GridPayments};
    use alloc::vec::Vec;

    fn voting_grid(tau: f64, p_shift: f64, r_shift: f64) -> MechanismDef {
        let f = threshold_count_f(2, 2).unwrap();
        let x = |b: &[f64], a: &[f64]| if f.eval_bits([b[0] >= tau, a[0] <= tau]) { 1.0 } else { 0.0 };
        let grid = GridAllocation::tabulate(1, 4, x).unwrap();
        let p: Vec<f64> = grid.values().iter().map(|x| (tau + p_shift) * x).collect();
        let r: Vec<f64> = grid.values().iter().map(|x| (tau + r_shift) * x).collect();
        MechanismDef::Grid { grid, payments: Some(GridPayments::Tables { p, r }) }
    }

    #[test]
    fn voting_is_sbb() {
        let m = MechanismDef::voting(0.5, threshold_count_f(4, 3).unwrap());
        let b = check_budget(&m, 2, 4, &SweepOptions::default()).unwrap();
        assert_eq!(b.class, BudgetClass::Sbb);
        assert_eq!(b.worst_gap, 0.0);
    }

    #[test]
    fn lower_receipt_is_wbb() {
        let b = check_budget(&voting_grid(0.5, 0.0, -0.1), 1, 4, &SweepOptions::default()).unwrap();
        assert_eq!(b.class, BudgetClass::Wbb);
        assert!((b.worst_gap - 0.1).abs() < 1e-12);
        assert_eq!(b.max_deficit, 0.0);
    }

    #[test]
    fn higher_receipt_is_neither() {
        let b = check_budget(&voting_grid(0.5, 0.0, 0.05), 1, 4, &SweepOptions::default()).unwrap();
        assert_eq!(b.class, BudgetClass::Neither);
        assert!((b.max_deficit - 0.05).abs() < 1e-12);
    }

    #[test]
    fn forced_trade_is_sbb() {
        let m = MechanismDef::Forced { mu_v: 0.6, mu_c: 0.4 };
        assert_eq!(check_budget(&m, 3, 4, &SweepOptions::default()).unwrap().class, BudgetClass::Sbb);
    }
}
