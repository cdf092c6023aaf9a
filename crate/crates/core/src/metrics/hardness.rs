//! The hardness instance: values uniform on `[0, 1]`, every cost `1/2`.

use core::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::math::ln_binomial;
use crate::mechanisms::Component;

/// Largest `n` accepted by [`fb_exact_hardness`].
pub const FB_EXACT_MAX_N: u64 = 4000;

/// Relative agreement required between the two forms of the threshold
/// mechanism's gains.
const FORM_TOL: f64 = 1e-10;

/// Leading-order first best `√(n / 24π)`.
pub fn fb_clt_hardness(n: f64) -> f64 {
    libm::sqrt(n / (24.0 * PI))
}

/// Exact first best `E[(Σ_{i≤n} v_i − n/2)⁺]` for `v_i ~ U[0, 1]`.
///
/// From the Irwin-Hall law:
/// `Σ_{k < n/2} (−1)^k C(n, k) (n − 2k)^{n+1} / (2^{n+1} (n + 1)!)`,
/// summed in exact integers.
pub fn fb_exact_hardness(n: u64) -> Result<f64> {
    if n == 0 || n > FB_EXACT_MAX_N {
        bail!(Usage, "exact first best needs 1 <= n <= {FB_EXACT_MAX_N}, got {n}");
    }
    let mut num = BigInt::zero();
    let mut binom = BigUint::one();
    for k in 0..=n / 2 {
        if k > 0 {
            binom = binom * (n - k + 1) / k;
        }
        let term = BigInt::from(binom.clone()) * BigInt::from(BigUint::from(n - 2 * k).pow((n + 1) as u32));
        if k % 2 == 0 {
            num += term;
        } else {
            num -= term;
        }
    }
    let mut den = BigUint::one() << (n + 1);
    for i in 2..=n + 1 {
        den *= i;
    }
    const SHIFT: u64 = 64;
    let scaled = (num << SHIFT) / BigInt::from(den);
    let value = scaled.to_f64().unwrap_or(f64::NAN) / libm::ldexp(1.0, SHIFT as i32);
    Ok(value)
}

fn threshold_m(n: u64, tau: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&tau) || n == 0 {
        bail!(Usage, "need n >= 1 and tau in [0, 1], got n = {n}, tau = {tau}");
    }
    let m = (1.0 - tau) * n as f64;
    let rounded = libm::round(m);
    if (m - rounded).abs() > 1e-9 * (n as f64).max(1.0) {
        bail!(Usage, "(1 - tau) n = {m} is not an integer");
    }
    Ok(rounded as u64)
}

/// `Σ_{i>m} ρ_i (i − m) / 2` with `ρ_i = C(n,i) τ^{n−i} (1−τ)^i / (C(n,m) τ^{n−m} (1−τ)^m)`,
/// built by the ratio recurrence so no large binomial is formed.
fn reduced_sum(n: u64, m: u64, tau: f64) -> f64 {
    let odds = (1.0 - tau) / tau;
    let mut rho = 1.0;
    let mut sum = 0.0;
    for i in m..n {
        rho *= (n - i) as f64 / (i + 1) as f64 * odds;
        if rho == 0.0 {
            break;
        }
        sum += rho * (i + 1 - m) as f64 / 2.0;
    }
    sum
}

/// `ln(C(n,m) τ^{n−m} (1−τ)^m)`, the binomial weight of the threshold count.
fn ln_weight(n: u64, m: u64, tau: f64) -> f64 {
    ln_binomial(n, m) + (n - m) as f64 * libm::log(tau) + m as f64 * libm::log(1.0 - tau)
}

/// Unsimplified gains of the threshold mechanism,
/// `Σ_{i=m}^{n} τ^{n−i} (1−τ)^i C(n,i) (i − m) / 2` with `m = (1−τ) n`.
pub fn hardness_alg_sum(n: u64, tau: f64) -> Result<f64> {
    let m = threshold_m(n, tau)?;
    if tau == 0.0 || tau == 1.0 {
        return Ok(0.0);
    }
    Ok(libm::exp(ln_weight(n, m, tau)) * reduced_sum(n, m, tau))
}

/// Closed form `(n/2) τ^{n−m+1} (1−τ)^{m+1} C(n, m)`, `m = (1−τ) n`, in
/// log space. Fails if it disagrees with [`hardness_alg_sum`] beyond
/// `1e−10` relative.
pub fn hardness_alg_exact(n: u64, tau: f64) -> Result<f64> {
    let m = threshold_m(n, tau)?;
    if tau == 0.0 || tau == 1.0 {
        return Ok(0.0);
    }
    let prefactor = n as f64 / 2.0 * tau * (1.0 - tau);
    let sum = reduced_sum(n, m, tau);
    if (sum - prefactor).abs() > FORM_TOL * prefactor {
        bail!(Model, "closed form {prefactor} and summed form {sum} disagree at n = {n}, tau = {tau}");
    }
    Ok(libm::exp(libm::log(prefactor) + ln_weight(n, m, tau)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessRatio {
    pub n: u64,
    /// Maximizing threshold.
    pub tau: f64,
    pub alg: f64,
    pub fb_clt: f64,
    /// `alg / fb_clt`.
    pub ratio: f64,
    /// Exact first best and ratio, when `n` is small enough.
    pub fb_exact: Option<f64>,
    pub ratio_exact: Option<f64>,
}

/// Best threshold mechanism over `τ ∈ {j/n}` against the first best.
pub fn hardness_ratio(n: u64) -> Result<HardnessRatio> {
    if n == 0 || n % 2 != 0 {
        bail!(Usage, "hardness ratio needs an even n >= 2, got {n}");
    }
    let mut best = (0.5, hardness_alg_exact(n, 0.5)?);
    for j in 1..n {
        let tau = j as f64 / n as f64;
        let alg = hardness_alg_exact(n, tau)?;
        if alg > best.1 {
            best = (tau, alg);
        }
    }
    let fb_clt = fb_clt_hardness(n as f64);
    let fb_exact = if n <= FB_EXACT_MAX_N { Some(fb_exact_hardness(n)?) } else { None };
    Ok(HardnessRatio {
        n,
        tau: best.0,
        alg: best.1,
        fb_clt,
        ratio: best.1 / fb_clt,
        fb_exact,
        ratio_exact: fb_exact.map(|fb| best.1 / fb),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedBound {
    /// `Σ_i E[(v − ½) f_i(v)]`.
    pub alg: f64,
    /// `Σ_i (f_i(1) − f_i(0)) / 8`.
    pub bound: f64,
}

/// Intervals of the composite Simpson rule.
const SIMPSON_INTERVALS: usize = 1 << 14;

fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / SIMPSON_INTERVALS as f64;
    let inner: f64 = (1..SIMPSON_INTERVALS)
        .map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(0.0) + inner + f(1.0)) * h / 3.0
}

/// Gains of a separable allocation with buyer components `f_i` on the
/// hardness instance, checked against the `Σ(f_i(1) − f_i(0))/8 ≤ 1/8`
/// bound.
pub fn randomized_hardness_bound(components: &[Component]) -> Result<RandomizedBound> {
    if components.is_empty() {
        bail!(Usage, "need at least one component");
    }
    for f in components {
        f.check_monotone(true)?;
    }
    let low: f64 = components.iter().map(|f| f.value(0.0)).sum();
    let high: f64 = components.iter().map(|f| f.value(1.0)).sum();
    if low < -1e-9 || high > 1.0 + 1e-9 {
        bail!(Model, "components sum to [{low}, {high}], outside [0, 1]");
    }
    let alg: f64 = components.iter().map(|f| simpson(|v| (v - 0.5) * f.value(v))).sum();
    let bound = (high - low) / 8.0;
    if alg > bound + 1e-6 || bound > 0.125 + 1e-6 {
        bail!(Model, "gains {alg} exceed the bound {bound}");
    }
    Ok(RandomizedBound { alg, bound })
}
