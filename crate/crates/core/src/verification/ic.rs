use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Role, Sweep, SweepOptions};
use crate::error::Result;
use crate::mechanisms::{GridSpace, MechanismDef, Outcome};

/// Regret at or below this is treated as zero.
pub const REGRET_TOL: f64 = 1e-12;

/// The most profitable misreport found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretWitness {
    pub role: Role,
    pub agent: usize,
    pub true_type: f64,
    pub deviation: f64,
    /// Truthful profile.
    pub bids: Vec<f64>,
    pub asks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    /// Largest utility gain from a misreport; zero iff no violation.
    pub max_regret: f64,
    pub worst_case: Option<RegretWitness>,
    /// Number of (profile, agent, deviation) triples with regret above
    /// [`REGRET_TOL`].
    pub violations: u64,
    pub profiles_checked: u64,
    pub sampled: bool,
}

impl RegretReport {
    pub fn is_ic(&self) -> bool {
        self.violations == 0
    }
}

/// Exhaustive (or sampled) regret of truthful reporting on the grid.
///
/// At each profile every agent's truthful utility (`x·v − p` for buyers,
/// `r − x·c` for sellers) is compared with each grid misreport. Randomized
/// allocations enter through their expected utilities, which are linear in
/// `x`.
pub fn check_ic(mech: &MechanismDef, n: usize, k: usize, opts: &SweepOptions) -> Result<RegretReport> {
    mech.validate(n)?;
    let space = GridSpace::new(n, k)?;
    let mut sweep = Sweep::new(space, opts);
    let (mut bids, mut asks) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let mut report =
        RegretReport { max_regret: 0.0, worst_case: None, violations: 0, profiles_checked: 0, sampled: sweep.sampled() };
    let independent = mech.is_report_independent();

    while let Some(coords) = sweep.next_coords() {
        space.fill(coords, &mut bids, &mut asks);
        report.profiles_checked += 1;
        let truth = mech.evaluate(&bids, &asks)?;
        if independent {
            continue;
        }
        for i in 0..n {
            let v = bids[i];
            let honest = truth.buyer_utility(v);
            for d in 0..=k {
                let dev = space.point(d as u32);
                if d as u32 == coords[i] {
                    continue;
                }
                bids[i] = dev;
                let out: Outcome = mech.evaluate(&bids, &asks)?;
                bids[i] = v;
                record(&mut report, out.buyer_utility(v) - honest, Role::Buyer, i, v, dev, &bids, &asks);
            }
        }
        for j in 0..n {
            let c = asks[j];
            let honest = truth.seller_utility(c);
            for d in 0..=k {
                if d as u32 == coords[n + j] {
                    continue;
                }
                let dev = space.point(d as u32);
                asks[j] = dev;
                let out = mech.evaluate(&bids, &asks)?;
                asks[j] = c;
                record(&mut report, out.seller_utility(c) - honest, Role::Seller, j, c, dev, &bids, &asks);
            }
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn record(
    report: &mut RegretReport,
    regret: f64,
    role: Role,
    agent: usize,
    true_type: f64,
    deviation: f64,
    bids: &[f64],
    asks: &[f64],
) {
    if regret <= REGRET_TOL {
        return;
    }
    report.violations += 1;
    if regret > report.max_regret {
        report.max_regret = regret;
        report.worst_case =
            Some(RegretWitness { role, agent, true_type, deviation, bids: bids.to_vec(), asks: asks.to_vec() });
    }
}
