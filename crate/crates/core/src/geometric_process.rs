//! Geometric processes and the alternating on/off model built from two of them.
//!
//! A geometric process with ratio β has `β^{i-1} Z_i` i.i.d. with the base law,
//! so `F_{Z_i}(t) = F_{Z_1}(β^{i-1} t)` and `E(Z_i) = E(Z_1) / β^{i-1}`.
//! Indices are 1-based everywhere.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

const CACHED_POWERS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricProcess {
    base: DistributionSpec,
    ratio: f64,
    // powers[i - 1] = ratio^{i-1}, built by repeated multiplication
    powers: Vec<f64>,
}

impl GeometricProcess {
    pub fn new(base: DistributionSpec, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::invalid("ratio", format!("must be finite and > 0 (got {ratio})")));
        }
        let mut powers = Vec::with_capacity(CACHED_POWERS);
        let mut p = 1.0;
        for _ in 0..CACHED_POWERS {
            powers.push(p);
            p *= ratio;
        }
        Ok(Self { base, ratio, powers })
    }

    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `ratio^{i-1}`; `i` must be at least 1.
    pub fn scale_factor(&self, i: usize) -> f64 {
        debug_assert!(i >= 1);
        match self.powers.get(i - 1) {
            Some(&p) => p,
            None => {
                let last = *self.powers.last().expect("cache is non-empty");
                last * self.ratio.powi((i - self.powers.len()) as i32)
            }
        }
    }

    fn check_index(i: usize) -> Result<()> {
        if i == 0 {
            Err(Error::Domain("process index must be >= 1".into()))
        } else {
            Ok(())
        }
    }

    pub fn cdf(&self, i: usize, t: f64) -> Result<f64> {
        Self::check_index(i)?;
        Ok(self.cdf_unchecked(i, t))
    }

    pub(crate) fn cdf_unchecked(&self, i: usize, t: f64) -> f64 {
        self.base.cdf(self.scale_factor(i) * t)
    }

    pub fn mean(&self, i: usize) -> Result<f64> {
        Self::check_index(i)?;
        Ok(self.mean_unchecked(i))
    }

    pub(crate) fn mean_unchecked(&self, i: usize) -> f64 {
        self.base.mean() / self.scale_factor(i)
    }

    pub fn sample(&self, i: usize, u: f64) -> Result<f64> {
        Self::check_index(i)?;
        Ok(self.base.sample(u)? / self.scale_factor(i))
    }
}

/// On-times form a stochastically decreasing process (ratio `a ≥ 1`),
/// off-times a stochastically increasing one (ratio `0 < b ≤ 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAgpModel", into = "RawAgpModel")]
pub struct AgpModel {
    on: GeometricProcess,
    off: GeometricProcess,
}

impl AgpModel {
    pub fn new(on: GeometricProcess, off: GeometricProcess) -> Result<Self> {
        let a = on.ratio();
        if a < 1.0 {
            return Err(Error::invalid("on.ratio_a", format!("must be >= 1 (got {a})")));
        }
        let b = off.ratio();
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::invalid("off.ratio_b", format!("must lie in (0, 1] (got {b})")));
        }
        Ok(Self { on, off })
    }

    pub fn from_parts(on: DistributionSpec, a: f64, off: DistributionSpec, b: f64) -> Result<Self> {
        let on = GeometricProcess::new(on, a).map_err(|e| rename(e, "on.ratio_a"))?;
        let off = GeometricProcess::new(off, b).map_err(|e| rename(e, "off.ratio_b"))?;
        Self::new(on, off)
    }

    /// Exponential on/off base laws with rates `lambda` and `mu`.
    pub fn exponential(lambda: f64, a: f64, mu: f64, b: f64) -> Result<Self> {
        let on = DistributionSpec::exponential(lambda).map_err(|e| rename(e, "on.dist.params.rate"))?;
        let off = DistributionSpec::exponential(mu).map_err(|e| rename(e, "off.dist.params.rate"))?;
        Self::from_parts(on, a, off, b)
    }

    pub fn on(&self) -> &GeometricProcess {
        &self.on
    }

    pub fn off(&self) -> &GeometricProcess {
        &self.off
    }

    pub fn a(&self) -> f64 {
        self.on.ratio()
    }

    pub fn b(&self) -> f64 {
        self.off.ratio()
    }
}

fn rename(e: Error, field: &str) -> Error {
    match e {
        Error::InvalidParameter { reason, .. } => Error::invalid(field, reason),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOnProcess {
    pub dist: DistributionSpec,
    pub ratio_a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOffProcess {
    pub dist: DistributionSpec,
    pub ratio_b: f64,
}

/// Wire form: `{"on": {"dist", "ratio_a"}, "off": {"dist", "ratio_b"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAgpModel {
    pub on: RawOnProcess,
    pub off: RawOffProcess,
}

impl TryFrom<RawAgpModel> for AgpModel {
    type Error = Error;

    fn try_from(raw: RawAgpModel) -> Result<Self> {
        AgpModel::from_parts(raw.on.dist, raw.on.ratio_a, raw.off.dist, raw.off.ratio_b)
    }
}

impl From<AgpModel> for RawAgpModel {
    fn from(m: AgpModel) -> Self {
        RawAgpModel {
            on: RawOnProcess {
                dist: m.on.base,
                ratio_a: m.on.ratio,
            },
            off: RawOffProcess {
                dist: m.off.base,
                ratio_b: m.off.ratio,
            },
        }
    }
}
