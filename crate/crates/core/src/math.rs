//! Small numeric helpers shared by the priors and the hardness formulas.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

pub(crate) fn normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * PI)
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `ln C(n, k)`. Exact integer arithmetic while the coefficient fits in a
/// `u64` (every `n <= 60`), log-gamma beyond.
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if n <= 60 {
        let mut c: u128 = 1;
        for i in 0..k as u128 {
            // c * (n - i) / (i + 1) stays integral at every step.
            c = c * (n as u128 - i) / (i + 1);
        }
        return libm::log(c as f64);
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_match_small_table() {
        assert!((libm::exp(ln_binomial(4, 2)) - 6.0).abs() < 1e-12);
        assert!((libm::exp(ln_binomial(60, 30)) - 118264581564861424.0).abs() / 1.2e17 < 1e-12);
        // log-gamma path continues smoothly past the exact cutoff
        let exact = ln_binomial(60, 30) + libm::log(61.0 / 31.0);
        assert!((ln_binomial(61, 30) - exact).abs() < 1e-9);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.3) + normal_cdf(-1.3) - 1.0).abs() < 1e-15);
    }
}
