use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Role;
use crate::error::{bail, Result};
use crate::mechanisms::{GridAllocation, GridSpace, MonotoneBoolFn, MAX_TABLE_ARITY};

/// Two profiles with the same vote pattern but different trade decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceWitness {
    /// The threshold under which the two profiles collide.
    pub tau: f64,
    /// Reports as bids followed by asks.
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub x_first: f64,
    pub x_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceResult {
    pub conforms: bool,
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<MonotoneBoolFn>,
    pub witness: Option<ConformanceWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedResult {
    pub conforms: bool,
    /// The side whose votes failed to explain `x`, and the fixed reports of
    /// the other side.
    pub failure: Option<(Role, Vec<f64>)>,
}

/// Candidate thresholds in increasing order, with the smallest buyer
/// coordinate that votes 1 and the largest seller coordinate that votes 1.
///
/// Grid points `t/K` give `(t, t)` (inclusive ties) and cell midpoints
/// `(t + ½)/K` give `(t + 1, t)`; together they realize every vote pattern
/// a threshold can induce on the grid.
fn candidates(k: usize) -> impl Iterator<Item = (f64, u32, u32)> {
    let kf = k as f64;
    (0..=k as u32).flat_map(move |t| {
        let point = core::iter::once((t as f64 / kf, t, t));
        let mid = (t < k as u32).then(|| ((t as f64 + 0.5) / kf, t + 1, t));
        point.chain(mid)
    })
}

enum Fit {
    Ok(Vec<u64>),
    /// Observation indices of a collision.
    Collision(u64, u64),
    NotMonotone,
}

/// Fits a monotone function to `(mask, x, index)` observations on `bits`
/// inputs. Unobserved masks take the value of the upward closure of the
/// observed ones.
fn fit_monotone(bits: usize, observations: impl Iterator<Item = (u64, bool, u64)>) -> Fit {
    let size = 1usize << bits;
    // 0 = unseen, 1 = false, 2 = true
    let mut seen = alloc::vec![0u8; size];
    let mut first = alloc::vec![0u64; size];
    for (mask, x, idx) in observations {
        let m = mask as usize;
        let code = 1 + x as u8;
        match seen[m] {
            0 => {
                seen[m] = code;
                first[m] = idx;
            }
            c if c != code => return Fit::Collision(first[m], idx),
            _ => {}
        }
    }
    let mut up: Vec<bool> = seen.iter().map(|c| *c == 2).collect();
    for i in 0..bits {
        let bit = 1usize << i;
        for m in 0..size {
            if m & bit != 0 && up[m ^ bit] {
                up[m] = true;
            }
        }
    }
    if seen.iter().zip(&up).any(|(c, u)| *c == 1 && *u) {
        return Fit::NotMonotone;
    }
    let mut words = alloc::vec![0u64; size.div_ceil(64)];
    for (m, u) in up.iter().enumerate() {
        if *u {
            words[m / 64] |= 1 << (m % 64);
        }
    }
    Fit::Ok(words)
}

fn votes(coords: &[u32], n: usize, tb: u32, ts: u32) -> u64 {
    let mut mask = 0u64;
    for (i, c) in coords[..n].iter().enumerate() {
        mask |= ((*c >= tb) as u64) << i;
    }
    for (j, c) in coords[n..].iter().enumerate() {
        mask |= ((*c <= ts) as u64) << (n + j);
    }
    mask
}

fn reports(space: &GridSpace, index: u64) -> Vec<f64> {
    let mut coords = alloc::vec![0u32; space.dims()];
    space.coords_of(index, &mut coords);
    coords.iter().map(|c| space.point(*c)).collect()
}

fn require_deterministic(x: &GridAllocation) -> Result<()> {
    if !x.is_deterministic() {
        bail!(Precondition, "conformance needs a deterministic allocation");
    }
    Ok(())
}

/// Searches for `(τ, f)` with `x(b, a) = f(1{b_i ≥ τ}, 1{a_j ≤ τ})` on every
/// grid profile, `f` monotone. Returns the smallest such `τ`.
pub fn check_voting_conformance(x: &GridAllocation) -> Result<ConformanceResult> {
    require_deterministic(x)?;
    let space = x.space();
    let n = space.n();
    if 2 * n > MAX_TABLE_ARITY {
        bail!(Usage, "conformance search is limited to 2n <= {MAX_TABLE_ARITY}");
    }
    let values = x.values();
    let mut witness = None;
    let mut coords = alloc::vec![0u32; space.dims()];
    for (tau, tb, ts) in candidates(space.k()) {
        coords.fill(0);
        let obs = (0..values.len() as u64).map(|idx| {
            if idx > 0 {
                space.advance(&mut coords);
            }
            (votes(&coords, n, tb, ts), values[idx as usize] == 1.0, idx)
        });
        match fit_monotone(2 * n, obs) {
            Fit::Ok(words) => {
                let f = MonotoneBoolFn::from_words(2 * n, words)?;
                return Ok(ConformanceResult { conforms: true, tau: Some(tau), f: Some(f), witness: None });
            }
            Fit::Collision(a, b) if witness.is_none() => {
                witness = Some(ConformanceWitness {
                    tau,
                    first: reports(&space, a),
                    second: reports(&space, b),
                    x_first: values[a as usize],
                    x_second: values[b as usize],
                });
            }
            _ => {}
        }
    }
    Ok(ConformanceResult { conforms: false, tau: None, f: None, witness })
}

/// With the other side's coordinates held at `fixed`, is there a threshold
/// and a monotone function of `role`'s votes reproducing `x`?
fn one_sided(x: &GridAllocation, role: Role, fixed: &[u32]) -> bool {
    let space = x.space();
    let (n, k) = (space.n(), space.k());
    let (own_range, other_range) = match role {
        Role::Buyer => (0..n, n..2 * n),
        Role::Seller => (n..2 * n, 0..n),
    };
    let mut coords = alloc::vec![0u32; space.dims()];
    coords[other_range].copy_from_slice(fixed);
    let mut own = alloc::vec![0u32; n];
    let profiles = (k as u64 + 1).pow(n as u32);
    candidates(k).any(|(_, tb, ts)| {
        own.fill(0);
        let obs = (0..profiles).map(|step| {
            if step > 0 {
                space.advance(&mut own);
            }
            coords[own_range.clone()].copy_from_slice(&own);
            let mask = own.iter().enumerate().fold(0u64, |m, (i, c)| {
                let vote = match role {
                    Role::Buyer => *c >= tb,
                    Role::Seller => *c <= ts,
                };
                m | (vote as u64) << i
            });
            (mask, x.value(&coords) == 1.0, step)
        });
        matches!(fit_monotone(n, obs), Fit::Ok(_))
    })
}

/// Checks that for every fixed ask vector the allocation is a monotone
/// function of buyer threshold votes, for a threshold that may depend on the
/// asks, and symmetrically for every fixed bid vector.
pub fn check_two_sided_conformance(x: &GridAllocation) -> Result<TwoSidedResult> {
    require_deterministic(x)?;
    let space = x.space();
    let n = space.n();
    if n > MAX_TABLE_ARITY {
        bail!(Usage, "conformance search is limited to n <= {MAX_TABLE_ARITY}");
    }
    let mut fixed = alloc::vec![0u32; n];
    for role in [Role::Buyer, Role::Seller] {
        fixed.fill(0);
        loop {
            if !one_sided(x, role, &fixed) {
                let reports = fixed.iter().map(|c| space.point(*c)).collect();
                return Ok(TwoSidedResult { conforms: false, failure: Some((role, reports)) });
            }
            if !space.advance(&mut fixed) {
                break;
            }
        }
    }
    Ok(TwoSidedResult { conforms: true, failure: None })
}
