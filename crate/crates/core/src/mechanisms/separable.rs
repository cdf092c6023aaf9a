//! Separable randomized allocations: the trade probability is a sum of
//! one-dimensional per-agent components.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// Slack allowed when a summed allocation leaves `[0, 1]`.
pub const RANGE_TOL: f64 = 1e-9;

/// Points used to check monotonicity and range of components.
pub const CHECK_POINTS: usize = 1024;

/// A smooth one-dimensional component on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Component {
    /// `Σ coeffs[k] z^k`.
    Poly { coeffs: Vec<f64> },
    /// `height / (1 + exp(-steepness (z - center)))`.
    Logistic { height: f64, center: f64, steepness: f64 },
    /// Piecewise linear through `values[i]` at `z = i / (len - 1)`.
    Table { values: Vec<f64> },
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + libm::log1p(libm::exp(-t.abs()))
}

impl Component {
    pub fn linear(slope: f64, intercept: f64) -> Self {
        Component::Poly { coeffs: alloc::vec![intercept, slope] }
    }

    pub fn constant(c: f64) -> Self {
        Component::Poly { coeffs: alloc::vec![c] }
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            Component::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c),
            Component::Logistic { height, center, steepness } => {
                height / (1.0 + libm::exp(-steepness * (z - center)))
            }
            Component::Table { values } => {
                let segs = (values.len() - 1) as f64;
                let t = (z.clamp(0.0, 1.0) * segs).min(segs);
                let i = (libm::floor(t) as usize).min(values.len() - 2);
                let frac = t - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    /// `∫ₐᵇ value(z) dz`, in closed form for every variant.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Component::Poly { coeffs } => {
                let anti = |z: f64| {
                    coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * z + c / (k as f64 + 1.0)) * z
                };
                anti(b) - anti(a)
            }
            Component::Logistic { height, center, steepness } => {
                if *steepness == 0.0 {
                    return 0.5 * height * (b - a);
                }
                height / steepness * (softplus(steepness * (b - center)) - softplus(steepness * (a - center)))
            }
            Component::Table { values } => {
                // trapezoids over the breakpoints inside [a, b]
                let segs = (values.len() - 1) as f64;
                let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
                let inner = (0..values.len()).map(|k| k as f64 / segs).filter(|z| *z > lo && *z < hi);
                let mut total = 0.0;
                let mut left = lo;
                for next in inner.chain(core::iter::once(hi)) {
                    total += 0.5 * (self.value(left) + self.value(next)) * (next - left);
                    left = next;
                }
                sign * total
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &f64| v.is_finite();
        match self {
            Component::Poly { coeffs } if coeffs.is_empty() || !coeffs.iter().all(finite) => {
                bail!(Model, "polynomial component needs finite coefficients")
            }
            Component::Table { values } if values.len() < 2 || !values.iter().all(finite) => {
                bail!(Model, "table component needs at least two finite values")
            }
            Component::Logistic { height, center, steepness }
                if !(height.is_finite() && center.is_finite() && steepness.is_finite()) =>
            {
                bail!(Model, "logistic component needs finite parameters")
            }
            _ => Ok(()),
        }
    }

    /// Checks the component is monotone in the given direction on an
    /// evaluation grid of [`CHECK_POINTS`] cells.
    pub fn check_monotone(&self, nondecreasing: bool) -> Result<()> {
        self.validate()?;
        let mut prev = self.value(0.0);
        for i in 1..=CHECK_POINTS {
            let z = i as f64 / CHECK_POINTS as f64;
            let v = self.value(z);
            let ok = if nondecreasing { v >= prev - 1e-12 } else { v <= prev + 1e-12 };
            if !ok {
                let dir = if nondecreasing { "nondecreasing" } else { "nonincreasing" };
                bail!(Model, "component is not {dir} near z = {z}");
            }
            prev = v;
        }
        Ok(())
    }
}

/// Sum of per-agent component values: `Σ_i f_i(z_i)`, which must lie in
/// `[0, 1]` up to [`RANGE_TOL`].
pub fn separable_allocation(components: &[Component], side: &[f64]) -> Result<f64> {
    if components.len() != side.len() {
        bail!(Usage, "{} components for {} agents", components.len(), side.len());
    }
    let x: f64 = components.iter().zip(side).map(|(f, z)| f.value(*z)).sum();
    check_range(x)
}

fn check_range(x: f64) -> Result<f64> {
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&x) {
        bail!(Model, "allocation {x} outside [0, 1]");
    }
    Ok(x.clamp(0.0, 1.0))
}

/// `x(b, a) = offset + Σ_i f_i(b_i) + Σ_j g_j(a_j)` with nondecreasing buyer
/// components and nonincreasing seller components.
///
/// Payments follow the Myerson construction per side:
/// `p = Σ_i (b_i f_i(b_i) − ∫₀^{b_i} f_i)` and
/// `r = Σ_j (a_j g_j(a_j) + ∫_{a_j}^1 g_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableDef {
    pub buyer: Vec<Component>,
    pub seller: Vec<Component>,
    #[serde(default)]
    pub offset: f64,
}

impl SeparableDef {
    pub fn n(&self) -> usize {
        self.buyer.len()
    }

    /// Checks shapes, monotonicity directions and that `x` stays in `[0, 1]`
    /// on the whole cube (exact for separable monotone sums: the extremes are
    /// at the corners).
    pub fn validate(&self) -> Result<()> {
        if self.buyer.is_empty() || self.buyer.len() != self.seller.len() {
            bail!(Usage, "need n >= 1 buyer and seller components, got {} and {}", self.buyer.len(), self.seller.len());
        }
        for f in &self.buyer {
            f.check_monotone(true)?;
        }
        for g in &self.seller {
            g.check_monotone(false)?;
        }
        let low = self.offset
            + self.buyer.iter().map(|f| f.value(0.0)).sum::<f64>()
            + self.seller.iter().map(|g| g.value(1.0)).sum::<f64>();
        let high = self.offset
            + self.buyer.iter().map(|f| f.value(1.0)).sum::<f64>()
            + self.seller.iter().map(|g| g.value(0.0)).sum::<f64>();
        check_range(low)?;
        check_range(high)?;
        Ok(())
    }

    pub fn allocation(&self, bids: &[f64], asks: &[f64]) -> Result<f64> {
        if bids.len() != self.buyer.len() || asks.len() != self.seller.len() {
            bail!(Usage, "separable mechanism for n = {} evaluated on {} bids / {} asks", self.n(), bids.len(), asks.len());
        }
        let x = self.offset
            + self.buyer.iter().zip(bids).map(|(f, b)| f.value(*b)).sum::<f64>()
            + self.seller.iter().zip(asks).map(|(g, a)| g.value(*a)).sum::<f64>();
        check_range(x)
    }

    pub fn payment(&self, bids: &[f64]) -> f64 {
        self.buyer.iter().zip(bids).map(|(f, b)| b * f.value(*b) - f.integral(0.0, *b)).sum()
    }

    pub fn receipt(&self, asks: &[f64]) -> f64 {
        self.seller.iter().zip(asks).map(|(g, a)| a * g.value(*a) + g.integral(*a, 1.0)).sum()
    }
}
