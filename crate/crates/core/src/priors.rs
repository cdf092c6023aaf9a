//! Bounded value and cost distributions on `[0, 1]`.
//!
//! Priors are validated when they are built; sampling never fails. A
//! truncated normal is the normal law *conditioned* on its support interval
//! and is drawn by rejection.

use alloc::{boxed::Box, format, vec::Vec};

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::math::{normal_cdf, normal_pdf};

/// Rejection sampling refuses parameters whose acceptance probability falls
/// below this value.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Tolerance on support endpoints and mixture weight sums.
const EPS: f64 = 1e-12;

/// Standard deviation of the normal family used in the experiments.
pub const DEFAULT_SIGMA: f64 = 0.2;
/// Half-width of the uniform family, also the truncation radius of the
/// normal family.
pub const DEFAULT_RADIUS: f64 = 0.4;

/// A validated distribution supported on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    TruncNormal(TruncNormal),
    Uniform { lo: f64, hi: f64 },
    Bernoulli { p: f64 },
    Mixture(Mixture),
    PointMass(f64),
}

#[derive(Debug, Clone, PartialEq)]
struct TruncNormal {
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
    cdf_lo: f64,
    mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Mixture {
    components: Vec<(f64, Prior)>,
    cumulative: Vec<f64>,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        bail!(InvalidPrior, "{name} must be finite, got {v}");
    }
    Ok(())
}

impl Prior {
    /// Normal law `N(mu, sigma^2)` conditioned on `[0, 1]`.
    pub fn truncated_normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::truncated_normal_on(mu, sigma, 0.0, 1.0)
    }

    /// Normal law `N(mu, sigma^2)` conditioned on `[lo, hi] ⊆ [0, 1]`.
    pub fn truncated_normal_on(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("sigma", sigma)?;
        if sigma <= 0.0 {
            bail!(InvalidPrior, "sigma must be positive, got {sigma}");
        }
        if !(lo >= -EPS && hi <= 1.0 + EPS && lo < hi) {
            bail!(InvalidPrior, "truncation interval [{lo}, {hi}] must be a non-empty subset of [0, 1]");
        }
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        let cdf_lo = normal_cdf((lo - mu) / sigma);
        let mass = normal_cdf((hi - mu) / sigma) - cdf_lo;
        if mass.is_nan() || mass < MIN_ACCEPTANCE {
            bail!(
                InvalidPrior,
                "N({mu}, {sigma}^2) puts mass {mass:e} on [{lo}, {hi}], below the rejection floor {MIN_ACCEPTANCE:e}"
            );
        }
        Ok(Self { kind: Kind::TruncNormal(TruncNormal { mu, sigma, lo, hi, cdf_lo, mass }) })
    }

    /// Uniform law on `[mu - radius, mu + radius]`.
    pub fn uniform(mu: f64, radius: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("radius", radius)?;
        if radius < 0.0 {
            bail!(InvalidPrior, "radius must be non-negative, got {radius}");
        }
        let (lo, hi) = (mu - radius, mu + radius);
        if lo < -EPS || hi > 1.0 + EPS {
            bail!(InvalidPrior, "U[{lo}, {hi}] leaves [0, 1]");
        }
        if radius == 0.0 {
            return Self::point(mu);
        }
        Ok(Self { kind: Kind::Uniform { lo: lo.max(0.0), hi: hi.min(1.0) } })
    }

    /// Bernoulli law on `{0, 1}` with success probability `mu`.
    pub fn bernoulli(mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            bail!(InvalidPrior, "Bernoulli mean must lie in [0, 1], got {mu}");
        }
        Ok(Self { kind: Kind::Bernoulli { p: mu } })
    }

    pub fn point(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            bail!(InvalidPrior, "point mass must lie in [0, 1], got {value}");
        }
        Ok(Self { kind: Kind::PointMass(value) })
    }

    /// Finite mixture. Weights must be positive and sum to one.
    pub fn mixture(components: Vec<(f64, Prior)>) -> Result<Self> {
        if components.is_empty() {
            bail!(InvalidPrior, "mixture needs at least one component");
        }
        let mut cumulative = Vec::with_capacity(components.len());
        let mut total = 0.0;
        for (w, _) in &components {
            if !(w.is_finite() && *w > 0.0) {
                bail!(InvalidPrior, "mixture weights must be positive, got {w}");
            }
            total += w;
            cumulative.push(total);
        }
        if (total - 1.0).abs() > EPS {
            bail!(InvalidPrior, "mixture weights sum to {total}, expected 1");
        }
        Ok(Self { kind: Kind::Mixture(Mixture { components, cumulative }) })
    }

    /// Exact expectation of the distribution as sampled.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::TruncNormal(t) => {
                let a = (t.lo - t.mu) / t.sigma;
                let b = (t.hi - t.mu) / t.sigma;
                let m = t.mu + t.sigma * (normal_pdf(a) - normal_pdf(b)) / t.mass;
                m.clamp(t.lo, t.hi)
            }
            Kind::Uniform { lo, hi } => 0.5 * (lo + hi),
            Kind::Bernoulli { p } => *p,
            Kind::Mixture(m) => m.components.iter().map(|(w, p)| w * p.mean()).sum(),
            Kind::PointMass(v) => *v,
        }
    }

    /// `P(draw <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::TruncNormal(n) => {
                if t < n.lo {
                    0.0
                } else if t >= n.hi {
                    1.0
                } else {
                    ((normal_cdf((t - n.mu) / n.sigma) - n.cdf_lo) / n.mass).clamp(0.0, 1.0)
                }
            }
            Kind::Uniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            Kind::Bernoulli { p } => {
                if t < 0.0 {
                    0.0
                } else if t < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Kind::Mixture(m) => m.components.iter().map(|(w, p)| w * p.cdf(t)).sum::<f64>().clamp(0.0, 1.0),
            Kind::PointMass(v) => {
                if t >= *v {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::TruncNormal(n) => (n.lo, n.hi),
            Kind::Uniform { lo, hi } => (*lo, *hi),
            Kind::Bernoulli { p } if *p == 0.0 => (0.0, 0.0),
            Kind::Bernoulli { p } if *p == 1.0 => (1.0, 1.0),
            Kind::Bernoulli { .. } => (0.0, 1.0),
            Kind::Mixture(m) => m
                .components
                .iter()
                .map(|(_, p)| p.support())
                .fold((1.0, 0.0), |(lo, hi), (a, b)| (f64::min(lo, a), f64::max(hi, b))),
            Kind::PointMass(v) => (*v, *v),
        }
    }

    /// True when every draw equals the mean.
    pub fn is_degenerate(&self) -> bool {
        let (lo, hi) = self.support();
        lo == hi
    }

    /// Serializable description of this prior.
    pub fn to_spec(&self) -> PriorSpec {
        match &self.kind {
            Kind::TruncNormal(n) => {
                let mut spec = PriorSpec::of_kind(PriorKind::Normal);
                spec.mu = Some(n.mu);
                spec.sigma = Some(n.sigma);
                if n.lo > 0.0 || n.hi < 1.0 {
                    spec.lo = Some(n.lo);
                    spec.hi = Some(n.hi);
                }
                spec
            }
            Kind::Uniform { lo, hi } => {
                let mut spec = PriorSpec::of_kind(PriorKind::Uniform);
                spec.mu = Some(0.5 * (lo + hi));
                spec.radius = Some(0.5 * (hi - lo));
                spec
            }
            Kind::Bernoulli { p } => {
                let mut spec = PriorSpec::of_kind(PriorKind::Bernoulli);
                spec.mu = Some(*p);
                spec
            }
            Kind::Mixture(m) => {
                let mut spec = PriorSpec::of_kind(PriorKind::Mixed);
                spec.components = Some(
                    m.components
                        .iter()
                        .map(|(w, p)| WeightedSpec { weight: *w, prior: Box::new(p.to_spec()) })
                        .collect(),
                );
                spec
            }
            Kind::PointMass(v) => {
                let mut spec = PriorSpec::of_kind(PriorKind::Point);
                spec.value = Some(*v);
                spec
            }
        }
    }
}

impl Distribution<f64> for Prior {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::TruncNormal(n) => loop {
                let z: f64 = rng.sample(StandardNormal);
                let v = n.mu + n.sigma * z;
                if v >= n.lo && v <= n.hi {
                    break v;
                }
            },
            Kind::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Kind::Bernoulli { p } => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Mixture(m) => {
                let u = rng.random::<f64>();
                let idx = m.cumulative.iter().position(|&c| u < c).unwrap_or(m.components.len() - 1);
                m.components[idx].1.sample(rng)
            }
            Kind::PointMass(v) => *v,
        }
    }
}

/// Distribution families of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Uniform,
    Bernoulli,
    Mixed,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Normal, Family::Uniform, Family::Bernoulli, Family::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Uniform => "uniform",
            Family::Bernoulli => "bernoulli",
            Family::Mixed => "mixed",
        }
    }

    /// Member of the family with mean `mu`.
    ///
    /// The normal member is `N(mu, sigma^2)` conditioned on
    /// `[mu - radius, mu + radius]`, the support of the uniform member. The
    /// mixed member puts weight 1/3 on each of the other three.
    pub fn prior(self, mu: f64, sigma: f64, radius: f64) -> Result<Prior> {
        match self {
            Family::Normal => {
                Prior::truncated_normal_on(mu, sigma, (mu - radius).max(0.0), (mu + radius).min(1.0))
            }
            Family::Uniform => Prior::uniform(mu, radius),
            Family::Bernoulli => Prior::bernoulli(mu),
            Family::Mixed => {
                let third = 1.0 / 3.0;
                Prior::mixture(alloc::vec![
                    (third, Family::Normal.prior(mu, sigma, radius)?),
                    (third, Family::Uniform.prior(mu, sigma, radius)?),
                    (1.0 - 2.0 * third, Family::Bernoulli.prior(mu, sigma, radius)?),
                ])
            }
        }
    }
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Family::Normal),
            "uniform" => Ok(Family::Uniform),
            "bernoulli" => Ok(Family::Bernoulli),
            "mixed" => Ok(Family::Mixed),
            other => Err(Error::Usage(format!("unknown distribution family {other:?}"))),
        }
    }
}

impl core::fmt::Display for Family {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Normal,
    Uniform,
    Bernoulli,
    Mixed,
    Point,
}

/// JSON form of a prior:
/// `{"kind": "normal"|"uniform"|"bernoulli"|"mixed"|"point", "mu": .., "sigma": .., "radius": .., "value": ..}`.
///
/// A `normal` with a `radius` is truncated to `[mu - radius, mu + radius]`;
/// explicit `lo`/`hi` override that, and without either it is conditioned on
/// `[0, 1]`. A `mixed` prior either lists weighted `components` or is the
/// equal-weight mixture of the normal, uniform and Bernoulli members with
/// mean `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<WeightedSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpec {
    pub weight: f64,
    pub prior: Box<PriorSpec>,
}

impl PriorSpec {
    fn of_kind(kind: PriorKind) -> Self {
        Self { kind, mu: None, sigma: None, radius: None, value: None, lo: None, hi: None, components: None }
    }

    fn require(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| Error::InvalidPrior(format!("{:?} prior is missing {name:?}", self.kind)))
    }

    pub fn build(&self) -> Result<Prior> {
        match self.kind {
            PriorKind::Normal => {
                let mu = self.require("mu", self.mu)?;
                let sigma = self.require("sigma", self.sigma)?;
                let (mut lo, mut hi) = match self.radius {
                    Some(r) => ((mu - r).max(0.0), (mu + r).min(1.0)),
                    None => (0.0, 1.0),
                };
                lo = self.lo.unwrap_or(lo);
                hi = self.hi.unwrap_or(hi);
                Prior::truncated_normal_on(mu, sigma, lo, hi)
            }
            PriorKind::Uniform => Prior::uniform(self.require("mu", self.mu)?, self.require("radius", self.radius)?),
            PriorKind::Bernoulli => Prior::bernoulli(self.require("mu", self.mu)?),
            PriorKind::Point => Prior::point(self.require("value", self.value)?),
            PriorKind::Mixed => match &self.components {
                Some(parts) => Prior::mixture(
                    parts.iter().map(|c| Ok((c.weight, c.prior.build()?))).collect::<Result<Vec<_>>>()?,
                ),
                None => Family::Mixed.prior(
                    self.require("mu", self.mu)?,
                    self.sigma.unwrap_or(DEFAULT_SIGMA),
                    self.radius.unwrap_or(DEFAULT_RADIUS),
                ),
            },
        }
    }
}

impl TryFrom<&PriorSpec> for Prior {
    type Error = Error;

    fn try_from(spec: &PriorSpec) -> Result<Self> {
        spec.build()
    }
}

impl Serialize for Prior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Prior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        PriorSpec::deserialize(d)?.build().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialStreams;

    fn empirical(prior: &Prior, draws: usize, seed: u64) -> (f64, f64, f64, f64) {
        let mut rng = TrialStreams::new(seed).stream(0);
        let (mut sum, mut sq, mut lo, mut hi) = (0.0, 0.0, f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..draws {
            let v = prior.sample(&mut rng);
            sum += v;
            sq += v * v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let mean = sum / draws as f64;
        let sd = (sq / draws as f64 - mean * mean).max(0.0).sqrt();
        (mean, sd, lo, hi)
    }

    #[test]
    fn point_mass_is_constant() {
        let p = Prior::point(0.5).unwrap();
        let (mean, sd, lo, hi) = empirical(&p, 1000, 1);
        assert_eq!((mean, sd, lo, hi), (0.5, 0.0, 0.5, 0.5));
        assert_eq!(p.mean(), 0.5);
    }

    #[test]
    fn bernoulli_draws_and_mean() {
        let p = Prior::bernoulli(0.6).unwrap();
        let mut rng = TrialStreams::new(2).stream(0);
        let n = 1_000_000;
        let mut ones = 0usize;
        for _ in 0..n {
            let v = p.sample(&mut rng);
            assert!(v == 0.0 || v == 1.0);
            ones += (v == 1.0) as usize;
        }
        assert!((ones as f64 / n as f64 - 0.6).abs() < 0.0015);
    }

    #[test]
    fn uniform_support_and_mean() {
        let p = Prior::uniform(0.6, 0.4).unwrap();
        let (mean, _, lo, hi) = empirical(&p, 1_000_000, 3);
        assert!(lo >= 0.2 && hi <= 1.0);
        assert!((mean - 0.6).abs() < 0.001);
        assert_eq!(Prior::uniform(0.55, 0.4).unwrap().mean(), 0.55);
    }

    #[test]
    fn truncated_normal_mean_against_sampling() {
        let p = Prior::truncated_normal(0.6, 0.2).unwrap();
        let m = p.mean();
        // quadrature of z·φ((z−μ)/σ) over [0, 1], normalized
        let steps = 100_000;
        let h = 1.0 / steps as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..steps {
            let z = (i as f64 + 0.5) * h;
            let w = libm::exp(-0.5 * ((z - 0.6) / 0.2) * ((z - 0.6) / 0.2));
            num += z * w;
            den += w;
        }
        assert!((m - num / den).abs() < 1e-9, "{m} vs {}", num / den);
        assert!(m > 0.589 && m < 0.59, "{m}");
        let n = 10_000_000;
        let (mean, sd, lo, hi) = empirical(&p, n, 4);
        assert!(lo >= 0.0 && hi <= 1.0);
        let se = sd / (n as f64).sqrt();
        assert!((mean - m).abs() < 3.0 * se, "{mean} vs {m} (se {se})");
    }

    #[test]
    fn symmetric_truncation_keeps_the_mean() {
        let p = Family::Normal.prior(0.6, 0.2, 0.4).unwrap();
        assert!((p.mean() - 0.6).abs() < 1e-12);
        let (lo, hi) = p.support();
        assert!((lo - 0.2).abs() < 1e-15 && hi == 1.0);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(Prior::uniform(0.6, 0.4).unwrap().cdf(0.6), 0.5);
        assert!((Prior::bernoulli(0.6).unwrap().cdf(0.5) - 0.4).abs() < 1e-15);
        assert_eq!(Prior::truncated_normal(0.6, 0.2).unwrap().cdf(1.0), 1.0);
        assert_eq!(Prior::point(0.5).unwrap().cdf(0.49), 0.0);
        assert_eq!(Prior::point(0.5).unwrap().cdf(0.5), 1.0);
    }

    #[test]
    fn mixed_mean_is_component_average() {
        for mu in [0.4, 0.45, 0.49, 0.51, 0.55, 0.6] {
            let parts: f64 = [Family::Normal, Family::Uniform, Family::Bernoulli]
                .iter()
                .map(|f| f.prior(mu, 0.2, 0.4).unwrap().mean())
                .sum::<f64>()
                / 3.0;
            let mixed = Family::Mixed.prior(mu, 0.2, 0.4).unwrap().mean();
            assert!((mixed - parts).abs() < 1e-9);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(Prior::uniform(0.7, 0.4), Err(Error::InvalidPrior(_))));
        assert!(Prior::bernoulli(1.2).is_err());
        assert!(Prior::point(-0.1).is_err());
        assert!(Prior::truncated_normal(0.5, 0.0).is_err());
        // acceptance probability far below the rejection floor
        assert!(Prior::truncated_normal(30.0, 1.0).is_err());
        let b = Prior::bernoulli(0.5).unwrap();
        assert!(Prior::mixture(alloc::vec![(0.5, b.clone()), (0.4, b.clone())]).is_err());
        assert!(Prior::mixture(alloc::vec![(1.5, b.clone()), (-0.5, b)]).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"kind":"mixed","mu":0.55}"#;
        let p: Prior = serde_json::from_str(json).unwrap();
        assert_eq!(p, Family::Mixed.prior(0.55, 0.2, 0.4).unwrap());
        let back: Prior = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back.mean(), p.mean());
        let n: Prior = serde_json::from_str(r#"{"kind":"normal","mu":0.6,"sigma":0.2}"#).unwrap();
        assert_eq!(n.support(), (0.0, 1.0));
        assert!(serde_json::from_str::<Prior>(r#"{"kind":"uniform","mu":0.6}"#).is_err());
    }
}
