use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Role;
use crate::mechanisms::GridAllocation;

/// Adjacent grid profiles where the allocation moves the wrong way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneWitness {
    pub role: Role,
    pub agent: usize,
    /// Reports (bids then asks) before and after raising the agent's report
    /// by one grid step.
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub x_from: f64,
    pub x_to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub monotone: bool,
    pub witness: Option<MonotoneWitness>,
}

/// Checks `x` is nondecreasing in every bid and nonincreasing in every ask
/// between adjacent grid points.
pub fn check_monotone(x: &GridAllocation) -> MonotoneReport {
    let space = x.space();
    let n = space.n();
    let values = x.values();
    let mut coords = alloc::vec![0u32; space.dims()];
    loop {
        let here = values[space.index(&coords) as usize];
        for d in 0..space.dims() {
            if coords[d] as usize == space.k() {
                continue;
            }
            coords[d] += 1;
            let up = values[space.index(&coords) as usize];
            let buyer = d < n;
            if (buyer && up < here) || (!buyer && up > here) {
                let to: Vec<f64> = coords.iter().map(|c| space.point(*c)).collect();
                coords[d] -= 1;
                let from: Vec<f64> = coords.iter().map(|c| space.point(*c)).collect();
                let (role, agent) = if buyer { (Role::Buyer, d) } else { (Role::Seller, d - n) };
                return MonotoneReport {
                    monotone: false,
                    witness: Some(MonotoneWitness { role, agent, from, to, x_from: here, x_to: up }),
                };
            }
            coords[d] -= 1;
        }
        if !space.advance(&mut coords) {
            break;
        }
    }
    MonotoneReport { monotone: true, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{voting_allocation, MonotoneBoolFn, Profile};

    #[test]
    fn voting_tabulation_is_monotone() {
        let and = MonotoneBoolFn::and(4);
        let x = GridAllocation::tabulate(2, 4, |b, a| {
            let p = Profile::new(b.to_vec(), a.to_vec()).unwrap();
            voting_allocation(0.5, &and, &p).unwrap() as u8 as f64
        })
        .unwrap();
        assert!(check_monotone(&x).monotone);
    }

    #[test]
    fn anti_monotone_bid_is_caught() {
        let x = GridAllocation::tabulate(2, 4, |b, _| if b[0] < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let report = check_monotone(&x);
        assert!(!report.monotone);
        let w = report.witness.unwrap();
        assert_eq!((w.role, w.agent), (Role::Buyer, 0));
        assert_eq!((w.from[0], w.to[0]), (0.25, 0.5));
        assert_eq!((w.x_from, w.x_to), (1.0, 0.0));
    }

    #[test]
    fn constant_and_seller_direction() {
        let one = GridAllocation::tabulate(2, 4, |_, _| 1.0).unwrap();
        assert!(check_monotone(&one).monotone);
        let rising_in_ask = GridAllocation::tabulate(1, 4, |_, a| a[0]).unwrap();
        let w = check_monotone(&rising_in_ask).witness.unwrap();
        assert_eq!(w.role, Role::Seller);
    }
}
