//! Parametric lifetime laws on `[0, ∞)`.
//!
//! These are the base laws of the on-time and off-time processes. Every
//! family exposes its CDF, survival function, closed-form mean and an
//! inverse-CDF sampler that is a deterministic function of the uniform
//! variate. Exponential and Weibull invert in closed form; Gamma and
//! Lognormal invert by bracketed bisection on the CDF.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::{erf, gamma};

use crate::error::{Error, Result};

/// Probability tolerance for numerically inverted CDFs.
pub const INVERSE_CDF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, scale: f64 },
    Lognormal { log_mean: f64, log_sd: f64 },
}

/// A validated lifetime distribution. Construct through the named
/// constructors or by deserializing `{family, params}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DistributionSpec {
    family: Family,
}

fn positive(field: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0 (got {value})")))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Exponential {
                rate: positive("rate", rate)?,
            },
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Weibull {
                shape: positive("shape", shape)?,
                scale: positive("scale", scale)?,
            },
        })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Gamma {
                shape: positive("shape", shape)?,
                scale: positive("scale", scale)?,
            },
        })
    }

    /// `log_mean` may be any finite real; `log_sd` must be positive.
    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        if !log_mean.is_finite() {
            return Err(Error::invalid("log_mean", format!("must be finite (got {log_mean})")));
        }
        Ok(Self {
            family: Family::Lognormal {
                log_mean,
                log_sd: positive("log_sd", log_sd)?,
            },
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Exponential { .. } => "exponential",
            Family::Weibull { .. } => "weibull",
            Family::Gamma { .. } => "gamma",
            Family::Lognormal { .. } => "lognormal",
        }
    }

    /// Whether [`DistributionSpec::sample`] uses a closed-form inverse.
    pub fn has_closed_form_inverse(&self) -> bool {
        matches!(self.family, Family::Exponential { .. } | Family::Weibull { .. })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t == f64::INFINITY {
            return 1.0;
        }
        match self.family {
            Family::Exponential { rate } => -(-rate * t).exp_m1(),
            Family::Weibull { shape, scale } => -(-(t / scale).powf(shape)).exp_m1(),
            Family::Gamma { shape, scale } => gamma::gamma_lr(shape, t / scale),
            Family::Lognormal { log_mean, log_sd } => {
                0.5 * erf::erfc(-(t.ln() - log_mean) / (log_sd * std::f64::consts::SQRT_2))
            }
        }
    }

    pub fn survival(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Exponential { rate } => 1.0 / rate,
            Family::Weibull { shape, scale } => scale * gamma::gamma(1.0 + 1.0 / shape),
            Family::Gamma { shape, scale } => shape * scale,
            Family::Lognormal { log_mean, log_sd } => (log_mean + 0.5 * log_sd * log_sd).exp(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.family {
            Family::Exponential { rate } => 1.0 / (rate * rate),
            Family::Weibull { shape, scale } => {
                let g1 = gamma::gamma(1.0 + 1.0 / shape);
                let g2 = gamma::gamma(1.0 + 2.0 / shape);
                scale * scale * (g2 - g1 * g1)
            }
            Family::Gamma { shape, scale } => shape * scale * scale,
            Family::Lognormal { log_mean, log_sd } => {
                let s2 = log_sd * log_sd;
                (s2.exp() - 1.0) * (2.0 * log_mean + s2).exp()
            }
        }
    }

    /// Inverse-CDF transform of a uniform variate `u ∈ (0, 1)`.
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("uniform variate must lie in (0,1), got {u}")));
        }
        Ok(self.inverse_cdf(u))
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        match self.family {
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::Gamma { .. } | Family::Lognormal { .. } => self.bisect_cdf(u),
        }
    }

    fn bisect_cdf(&self, u: f64) -> f64 {
        let mut lo = 0.0_f64;
        let mut hi = self.mean().max(f64::MIN_POSITIVE);
        while self.cdf(hi) < u {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = self.cdf(mid);
            if (f - u).abs() <= INVERSE_CDF_TOLERANCE || mid == lo || mid == hi {
                return mid;
            }
            if f < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            Family::Weibull { shape, scale } => write!(f, "Weibull(shape={shape}, scale={scale})"),
            Family::Gamma { shape, scale } => write!(f, "Gamma(shape={shape}, scale={scale})"),
            Family::Lognormal { log_mean, log_sd } => {
                write!(f, "Lognormal(log_mean={log_mean}, log_sd={log_sd})")
            }
        }
    }
}

/// Wire form: `{"family": "...", "params": {name: number}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDistribution {
    pub family: String,
    pub params: BTreeMap<String, f64>,
}

impl TryFrom<RawDistribution> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        let expect = |names: &[&str]| -> Result<Vec<f64>> {
            if let Some(extra) = raw.params.keys().find(|k| !names.contains(&k.as_str())) {
                return Err(Error::invalid(
                    format!("params.{extra}"),
                    format!("unknown parameter for family `{}`", raw.family),
                ));
            }
            names
                .iter()
                .map(|n| {
                    raw.params
                        .get(*n)
                        .copied()
                        .ok_or_else(|| Error::invalid(format!("params.{n}"), "missing"))
                })
                .collect()
        };
        let prefix = |e: Error| match e {
            Error::InvalidParameter { field, reason } if !field.starts_with("params.") => {
                Error::InvalidParameter {
                    field: format!("params.{field}"),
                    reason,
                }
            }
            other => other,
        };
        match raw.family.to_ascii_lowercase().as_str() {
            "exponential" => {
                let p = expect(&["rate"])?;
                Self::exponential(p[0]).map_err(prefix)
            }
            "weibull" => {
                let p = expect(&["shape", "scale"])?;
                Self::weibull(p[0], p[1]).map_err(prefix)
            }
            "gamma" => {
                let p = expect(&["shape", "scale"])?;
                Self::gamma(p[0], p[1]).map_err(prefix)
            }
            "lognormal" => {
                let p = expect(&["log_mean", "log_sd"])?;
                Self::lognormal(p[0], p[1]).map_err(prefix)
            }
            other => Err(Error::invalid("family", format!("unknown family `{other}`"))),
        }
    }
}

impl From<DistributionSpec> for RawDistribution {
    fn from(d: DistributionSpec) -> Self {
        let params: Vec<(&str, f64)> = match d.family {
            Family::Exponential { rate } => vec![("rate", rate)],
            Family::Weibull { shape, scale } => vec![("shape", shape), ("scale", scale)],
            Family::Gamma { shape, scale } => vec![("shape", shape), ("scale", scale)],
            Family::Lognormal { log_mean, log_sd } => {
                vec![("log_mean", log_mean), ("log_sd", log_sd)]
            }
        };
        RawDistribution {
            family: d.family_name().to_string(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_families() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::exponential(0.0055).unwrap(),
            DistributionSpec::weibull(2.0, 1.0).unwrap(),
            DistributionSpec::weibull(0.7, 50.0).unwrap(),
            DistributionSpec::gamma(2.0, 1.0).unwrap(),
            DistributionSpec::gamma(0.5, 3.0).unwrap(),
            DistributionSpec::lognormal(0.0, 0.5).unwrap(),
            DistributionSpec::lognormal(4.0, 1.2).unwrap(),
        ]
    }

    #[test]
    fn cdf_examples() {
        let e = DistributionSpec::exponential(0.0055).unwrap();
        assert_eq!(e.cdf(0.0), 0.0);
        let e2 = DistributionSpec::exponential(2.0).unwrap();
        assert!((e2.cdf(2f64.ln() / 2.0) - 0.5).abs() < 1e-15);
        let w = DistributionSpec::weibull(1.0, 1.0 / 0.0055).unwrap();
        // 1 - e^{-0.55}
        assert!((w.cdf(100.0) - 0.423_050_189_619_513_5).abs() < 1e-12);
    }

    #[test]
    fn survival_examples() {
        for d in all_families() {
            assert_eq!(d.survival(-1.0), 1.0);
        }
        let e = DistributionSpec::exponential(0.01).unwrap();
        assert!((e.survival(100.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(DistributionSpec::gamma(2.0, 1.0).unwrap().survival(0.0), 1.0);
    }

    #[test]
    fn mean_examples() {
        let e = DistributionSpec::exponential(0.0055).unwrap();
        assert!((e.mean() - 181.818_181_818).abs() < 1e-6);
        assert_eq!(DistributionSpec::exponential(2.0).unwrap().mean(), 0.5);
        let ln = DistributionSpec::lognormal(0.0, 0.5).unwrap();
        assert!((ln.mean() - 0.125f64.exp()).abs() < 1e-14);
        assert!((ln.mean() - 1.133_148_453).abs() < 1e-9);
        // Weibull(shape=1) is exponential.
        let w = DistributionSpec::weibull(1.0, 4.0).unwrap();
        assert!((w.mean() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sample_examples() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        let u = 1.0 - (-3f64).exp();
        assert!((e.sample(u).unwrap() - 3.0).abs() < 1e-12);
        let w = DistributionSpec::weibull(2.0, 1.0).unwrap();
        assert!((w.sample(1.0 - (-1f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(e.sample(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn invalid_parameters_rejected_at_construction() {
        assert!(DistributionSpec::exponential(0.0).is_err());
        assert!(DistributionSpec::exponential(-1.0).is_err());
        assert!(DistributionSpec::weibull(1.0, f64::NAN).is_err());
        assert!(DistributionSpec::gamma(0.0, 1.0).is_err());
        assert!(DistributionSpec::lognormal(0.0, 0.0).is_err());
        assert!(DistributionSpec::lognormal(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn wire_format_validates() {
        let raw = RawDistribution {
            family: "exponential".into(),
            params: [("rate".to_string(), -2.0)].into_iter().collect(),
        };
        let err = DistributionSpec::try_from(raw).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref field, .. } if field == "params.rate"));
        let raw = RawDistribution {
            family: "weibull".into(),
            params: [("shape".to_string(), 2.0)].into_iter().collect(),
        };
        assert!(DistributionSpec::try_from(raw).is_err());
        let raw = RawDistribution {
            family: "pareto".into(),
            params: BTreeMap::new(),
        };
        assert!(DistributionSpec::try_from(raw).is_err());
        for d in all_families() {
            let back = DistributionSpec::try_from(RawDistribution::from(d)).unwrap();
            assert_eq!(back, d);
        }
    }

    #[test]
    fn cdf_monotone_on_grid() {
        for d in all_families() {
            let ts: Vec<f64> = (0..2000).map(|k| k as f64 * d.mean() / 200.0).collect();
            for w in ts.windows(2) {
                assert!(d.cdf(w[1]) >= d.cdf(w[0]), "{d} at {}", w[1]);
            }
            assert!(d.cdf(1e12) > 1.0 - 1e-9);
        }
    }

    /// Dvoretzky–Kiefer–Wolfowitz band at 99% confidence for 10^6 samples.
    #[test]
    fn empirical_cdf_inside_dkw_band() {
        use rand::{Rng, SeedableRng};
        let n = 1_000_000usize;
        let eps = ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
        for d in [
            DistributionSpec::exponential(0.0055).unwrap(),
            DistributionSpec::weibull(1.5, 10.0).unwrap(),
        ] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            let mut xs: Vec<f64> = (0..n)
                .map(|_| d.sample(rng.sample(rand::distr::Open01)).unwrap())
                .collect();
            xs.sort_by(f64::total_cmp);
            let mut sup = 0.0f64;
            for (i, &x) in xs.iter().enumerate() {
                let f = d.cdf(x);
                sup = sup
                    .max((f - i as f64 / n as f64).abs())
                    .max(((i + 1) as f64 / n as f64 - f).abs());
            }
            assert!(sup < eps, "{d}: sup {sup} >= {eps}");
            let mean = xs.iter().sum::<f64>() / n as f64;
            let se = d.variance().sqrt() / (n as f64).sqrt();
            assert!((mean - d.mean()).abs() < 3.0 * se, "{d}: {mean} vs {}", d.mean());
        }
    }

    #[test]
    fn sample_mean_within_three_se_for_numeric_inverse() {
        use rand::{Rng, SeedableRng};
        let n = 200_000usize;
        for d in [
            DistributionSpec::gamma(2.0, 1.5).unwrap(),
            DistributionSpec::lognormal(0.0, 0.5).unwrap(),
        ] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
            let mean = (0..n)
                .map(|_| d.sample(rng.sample(rand::distr::Open01)).unwrap())
                .sum::<f64>()
                / n as f64;
            let se = d.variance().sqrt() / (n as f64).sqrt();
            assert!((mean - d.mean()).abs() < 3.0 * se, "{d}: {mean} vs {}", d.mean());
        }
    }

    proptest! {
        #[test]
        fn survival_plus_cdf_is_one(t in -10.0f64..1e4, idx in 0usize..7) {
            let d = all_families()[idx];
            prop_assert_eq!(d.survival(t) + d.cdf(t), 1.0);
        }

        #[test]
        fn sample_inverts_cdf(u in 1e-9f64..(1.0 - 1e-9), idx in 0usize..7) {
            let d = all_families()[idx];
            let x = d.sample(u).unwrap();
            let tol = if d.has_closed_form_inverse() { 1e-10 } else { 1e-6 };
            prop_assert!((d.cdf(x) - u).abs() <= tol, "{} u={} x={} F={}", d, u, x, d.cdf(x));
        }
    }
}
