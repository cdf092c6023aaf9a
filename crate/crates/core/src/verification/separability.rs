use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Role;
use crate::error::{bail, Result};
use crate::rng::TrialStreams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityOptions {
    /// Finite-difference step.
    pub h: f64,
    /// Mixed partials at or below this count as zero.
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SeparabilityOptions {
    fn default() -> Self {
        Self { h: 1e-3, tol: 1e-4, samples: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    /// Largest estimated `|∂²x / ∂z₁∂z₂|` over same-side report pairs.
    pub max_mixed_partial: f64,
    pub separable: bool,
    /// Side and agent pair of the largest estimate.
    pub worst: Option<(Role, usize, usize)>,
    pub points: usize,
}

/// Estimates every within-side mixed partial of `x` by central differences
/// at seeded random points of `[0, 1]^{2n}`.
///
/// Near the boundary the step shrinks so every evaluation stays inside the
/// cube; points closer than `h/4` to a face are moved in to `h/4`.
pub fn check_separability(
    mut x: impl FnMut(&[f64], &[f64]) -> Result<f64>,
    n: usize,
    opts: &SeparabilityOptions,
) -> Result<SeparabilityReport> {
    if n == 0 || !(opts.h > 0.0 && opts.h < 0.5) || opts.samples == 0 {
        bail!(Usage, "separability needs n >= 1, 0 < h < 0.5 and at least one sample");
    }
    let mut rng = TrialStreams::new(opts.seed).stream(0);
    let (mut bids, mut asks) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let mut report = SeparabilityReport { max_mixed_partial: 0.0, separable: true, worst: None, points: 0 };
    let floor = opts.h / 4.0;

    for _ in 0..opts.samples {
        for z in bids.iter_mut().chain(asks.iter_mut()) {
            *z = rng.random_range(0.0..=1.0f64).clamp(floor, 1.0 - floor);
        }
        for role in [Role::Buyer, Role::Seller] {
            for i1 in 0..n {
                for i2 in i1 + 1..n {
                    let side = if role == Role::Buyer { &mut bids } else { &mut asks };
                    let (z1, z2) = (side[i1], side[i2]);
                    let h = [z1, 1.0 - z1, z2, 1.0 - z2].into_iter().fold(opts.h, f64::min);
                    let mut corner = |s1: f64, s2: f64, bids: &mut [f64], asks: &mut [f64]| -> Result<f64> {
                        let side = if role == Role::Buyer { &mut *bids } else { &mut *asks };
                        side[i1] = z1 + s1 * h;
                        side[i2] = z2 + s2 * h;
                        let v = x(bids, asks);
                        let side = if role == Role::Buyer { &mut *bids } else { &mut *asks };
                        side[i1] = z1;
                        side[i2] = z2;
                        v
                    };
                    let d = corner(1.0, 1.0, &mut bids, &mut asks)? - corner(1.0, -1.0, &mut bids, &mut asks)?
                        - corner(-1.0, 1.0, &mut bids, &mut asks)?
                        + corner(-1.0, -1.0, &mut bids, &mut asks)?;
                    let partial = (d / (4.0 * h * h)).abs();
                    if partial > report.max_mixed_partial {
                        report.max_mixed_partial = partial;
                        report.worst = Some((role, i1, i2));
                    }
                }
            }
        }
        report.points += 1;
    }
    report.separable = report.max_mixed_partial <= opts.tol;
    Ok(report)
}
