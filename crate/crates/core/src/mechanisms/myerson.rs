//! Myerson payment synthesis for one agent's allocation slice.
//!
//! A slice is the allocation as a function of a single report with everything
//! else held fixed, sampled on the grid `z = i / K`. Deterministic mechanisms
//! are step functions, so the integrals are exact sums of cell areas: each
//! cell `[i/K, (i+1)/K]` contributes the smaller of its two endpoint values.
//! For a nondecreasing buyer slice that is the left endpoint, for a
//! nonincreasing seller slice the right one, i.e. the trade region includes
//! its boundary (ties favour trade).

use alloc::vec::Vec;

use crate::error::{bail, Result};

const GRID_TOL: f64 = 1e-9;

/// Allocation of one agent's report on the uniform grid `{0, 1/K, ..., 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSlice {
    values: Vec<f64>,
}

impl StepSlice {
    /// `values[i]` is the allocation at `z = i / K`; needs `K >= 1`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            bail!(Usage, "a slice needs at least two grid points, got {}", values.len());
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            bail!(Model, "allocation value {v} outside [0, 1]");
        }
        Ok(Self { values })
    }

    pub fn from_fn(k: usize, mut x: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new((0..=k).map(|i| x(i as f64 / k as f64)).collect())
    }

    /// Grid resolution `K`.
    pub fn k(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// Grid index of `z`, which must be a multiple of `1/K`.
    pub fn grid_index(&self, z: f64) -> Result<usize> {
        let k = self.k() as f64;
        let scaled = z * k;
        let idx = libm::round(scaled);
        if !(0.0..=1.0).contains(&z) || (scaled - idx).abs() > GRID_TOL {
            bail!(Precondition, "report {z} is not on the grid of step 1/{}", self.k());
        }
        Ok(idx as usize)
    }

    /// `∫ x dz` over `[from/K, to/K]` for grid indices `from <= to`.
    pub fn integral(&self, from: usize, to: usize) -> f64 {
        let width = 1.0 / self.k() as f64;
        step_integral(&self.values[from..=to]) * width
    }
}

/// Sum of per-cell minima of consecutive samples (unit cell width).
pub(crate) fn step_integral(samples: &[f64]) -> f64 {
    samples.windows(2).map(|w| w[0].min(w[1])).sum()
}

/// Buyer payment `b·x(b) − ∫₀ᵇ x(z) dz + offset` for a nondecreasing slice;
/// `offset` is the gauge term that does not depend on the buyer's own bid.
pub fn myerson_buyer_payment(slice: &StepSlice, bid: f64, offset: f64) -> Result<f64> {
    if !slice.is_nondecreasing() {
        bail!(Precondition, "buyer allocation slice is not nondecreasing");
    }
    let i = slice.grid_index(bid)?;
    Ok(bid * slice.values[i] - slice.integral(0, i) + offset)
}

/// Seller receipt `a·x(a) + ∫ₐ¹ x(z) dz + offset` for a nonincreasing slice.
pub fn myerson_seller_receipt(slice: &StepSlice, ask: f64, offset: f64) -> Result<f64> {
    if !slice.is_nonincreasing() {
        bail!(Precondition, "seller allocation slice is not nonincreasing");
    }
    let j = slice.grid_index(ask)?;
    Ok(ask * slice.values[j] + slice.integral(j, slice.k()) + offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    /// Midpoint Riemann sum, an integral oracle independent of the grid sums.
    fn riemann(lo: f64, hi: f64, x: impl Fn(f64) -> f64) -> f64 {
        let n = 1_000_000;
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| x(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn buyer_examples() {
        let step = StepSlice::from_fn(10, |z| if z >= 0.5 { 1.0 } else { 0.0 }).unwrap();
        let oracle = 0.8 - riemann(0.0, 0.8, |z| if z >= 0.5 { 1.0 } else { 0.0 });
        let p = myerson_buyer_payment(&step, 0.8, 0.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((p - oracle).abs() < 1e-6);

        let zero = StepSlice::from_fn(10, |_| 0.0).unwrap();
        assert_eq!(myerson_buyer_payment(&zero, 0.3, 0.0).unwrap(), 0.0);
        let one = StepSlice::from_fn(10, |_| 1.0).unwrap();
        assert!(myerson_buyer_payment(&one, 0.7, 0.0).unwrap().abs() < 1e-12);
        assert!((myerson_buyer_payment(&one, 0.7, 0.25).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn seller_examples() {
        let step = StepSlice::from_fn(10, |z| if z <= 0.5 { 1.0 } else { 0.0 }).unwrap();
        let oracle = 0.2 + riemann(0.2, 1.0, |z| if z <= 0.5 { 1.0 } else { 0.0 });
        let r = myerson_seller_receipt(&step, 0.2, 0.0).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert!((r - oracle).abs() < 1e-6);

        let zero = StepSlice::from_fn(10, |_| 0.0).unwrap();
        assert_eq!(myerson_seller_receipt(&zero, 0.4, 0.125).unwrap(), 0.125);
        let one = StepSlice::from_fn(10, |_| 1.0).unwrap();
        assert!((myerson_seller_receipt(&one, 0.4, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn voting_slice_pays_the_threshold_everywhere() {
        for k in [4usize, 8, 20] {
            for t in 0..=k {
                let tau = t as f64 / k as f64;
                let slice = StepSlice::from_fn(k, |z| if z >= tau { 1.0 } else { 0.0 }).unwrap();
                for i in 0..=k {
                    let b = i as f64 / k as f64;
                    let x = if b >= tau { 1.0 } else { 0.0 };
                    let p = myerson_buyer_payment(&slice, b, 0.0).unwrap();
                    assert!((p - tau * x).abs() < 1e-12, "k={k} tau={tau} b={b}: {p}");
                }
            }
        }
    }

    #[test]
    fn precondition_errors() {
        let down = StepSlice::new(alloc::vec![1.0, 0.0]).unwrap();
        assert!(matches!(myerson_buyer_payment(&down, 1.0, 0.0), Err(Error::Precondition(_))));
        let up = StepSlice::new(alloc::vec![0.0, 1.0]).unwrap();
        assert!(matches!(myerson_seller_receipt(&up, 0.0, 0.0), Err(Error::Precondition(_))));
        let fine = StepSlice::from_fn(4, |z| z).unwrap();
        assert!(matches!(myerson_buyer_payment(&fine, 0.3, 0.0), Err(Error::Precondition(_))));
        assert!(StepSlice::new(alloc::vec![0.0]).is_err());
        assert!(matches!(StepSlice::new(alloc::vec![0.0, 1.5]), Err(Error::Model(_))));
    }
}
