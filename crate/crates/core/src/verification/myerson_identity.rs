use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Role, Sweep, SweepOptions};
use crate::error::Result;
use crate::mechanisms::{step_integral, GridSpace, MechanismDef};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MyersonReport {
    /// Largest gap between a payment (receipt) increment along a line and
    /// the increment predicted from the allocation.
    pub max_deviation: f64,
    /// Role and agent of the worst line.
    pub worst: Option<(Role, usize)>,
    pub lines_checked: u64,
    pub sampled: bool,
}

/// Checks the payment identity along every line that varies one report.
///
/// On a line through `z_0 = 0, ..., z_K = 1` the increments must satisfy
/// `p(z_t) − p(z_0) = z_t·x(z_t) − z_0·x(z_0) − ∫ x` for buyers and the same
/// form with `r` for sellers, which removes the report-independent term.
/// Integrals use the step rule on grid cells (the lower endpoint value of a
/// monotone step function). Continuous allocations therefore carry a
/// discretization error of order `1/K`.
pub fn check_myerson_identity(mech: &MechanismDef, n: usize, k: usize, opts: &SweepOptions) -> Result<MyersonReport> {
    mech.validate(n)?;
    let space = GridSpace::new(n, k)?;
    let mut sweep = Sweep::new(space, opts);
    let sampled = sweep.sampled();
    let (mut bids, mut asks) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let mut line: Vec<u32> = alloc::vec![0; space.dims()];
    let mut xs = Vec::with_capacity(k + 1);
    let mut report = MyersonReport { max_deviation: 0.0, worst: None, lines_checked: 0, sampled };

    while let Some(coords) = sweep.next_coords() {
        for d in 0..space.dims() {
            // exhaustive sweeps visit each line once, from its zero end
            if !sampled && coords[d] != 0 {
                continue;
            }
            line.copy_from_slice(coords);
            xs.clear();
            let mut base_money = 0.0;
            let mut worst_here = 0.0f64;
            for t in 0..=k {
                line[d] = t as u32;
                space.fill(&line, &mut bids, &mut asks);
                let o = mech.evaluate(&bids, &asks)?;
                let money = if d < n { o.p } else { o.r };
                xs.push(o.x);
                if t == 0 {
                    base_money = money;
                    continue;
                }
                let z = space.point(t as u32);
                let predicted = z * o.x - step_integral(&xs) / k as f64;
                worst_here = worst_here.max(((money - base_money) - predicted).abs());
            }
            report.lines_checked += 1;
            if worst_here > report.max_deviation {
                report.max_deviation = worst_here;
                report.worst = Some(if d < n { (Role::Buyer, d) } else { (Role::Seller, d - n) });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{threshold_count_f, GridAllocation, GridPayments};

    #[test]
    fn forced_trade_is_exact() {
        let m = MechanismDef::Forced { mu_v: 0.6, mu_c: 0.4 };
        let r = check_myerson_identity(&m, 2, 4, &SweepOptions::default()).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.lines_checked, 4 * 125);
    }

    #[test]
    fn voting_family_is_exact() {
        for tau in [0.25, 0.5, 0.75] {
            for m in 0..=5 {
                let mech = MechanismDef::voting(tau, threshold_count_f(4, m).unwrap());
                let r = check_myerson_identity(&mech, 2, 4, &SweepOptions::default()).unwrap();
                assert!(r.max_deviation < 1e-12, "tau {tau} m {m}: {}", r.max_deviation);
            }
        }
    }

    #[test]
    fn perturbed_payment_is_caught() {
        let tau = 0.5;
        let f = threshold_count_f(4, 3).unwrap();
        let x = |b: &[f64], a: &[f64]| {
            let bits = b.iter().map(|v| *v >= tau).chain(a.iter().map(|c| *c <= tau));
            if f.eval_bits(bits) { 1.0 } else { 0.0 }
        };
        let grid = GridAllocation::tabulate(2, 4, x).unwrap();
        let space = grid.space();
        let mut coords = alloc::vec![0u32; 4];
        let (mut p, mut r) = (Vec::new(), Vec::new());
        for v in grid.values() {
            p.push(tau * v + 0.01 * space.point(coords[0]));
            r.push(tau * v);
            space.advance(&mut coords);
        }
        let m = MechanismDef::Grid { grid, payments: Some(GridPayments::Tables { p, r }) };
        let rep = check_myerson_identity(&m, 2, 4, &SweepOptions::default()).unwrap();
        assert!((rep.max_deviation - 0.01).abs() < 1e-12, "{}", rep.max_deviation);
        assert_eq!(rep.worst, Some((Role::Buyer, 0)));
    }
}
