//! Uniform time grids, tabulated functions on them, and the trapezoidal
//! Riemann–Stieltjes rules shared by every analytic quantity.
//!
//! A grid CDF `M` is handled through its cell masses `ΔM_j = M(t_j) - M(t_{j-1})`
//! (plus a possible atom `M(0)`). Integrals `∫ g(t - s) dM(s)` use the
//! trapezoid value of `g` over each cell, which is the exact convolution when
//! the mass inside every cell is spread uniformly. The rule is symmetric in the
//! two factors and second-order accurate for smooth laws.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of steps across the warranty period.
pub const DEFAULT_STEPS_PER_HORIZON: usize = 4096;
/// Default grid length as a multiple of the warranty period.
pub const DEFAULT_HORIZON_MULTIPLE: f64 = 3.0;

const SNAP_TOLERANCE: f64 = 1e-9;
const CDF_TOLERANCE: f64 = 1e-9;
const PARALLEL_WORK: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub t_max: f64,
    pub dt: f64,
}

impl Grid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("grid.dt", format!("must be finite and > 0 (got {dt})")));
        }
        if !(t_max.is_finite() && dt < t_max) {
            return Err(Error::invalid(
                "grid.dt",
                format!("must be smaller than t_max (dt = {dt}, t_max = {t_max})"),
            ));
        }
        Ok(Self { t_max, dt })
    }

    /// `dt = T/4096`, `t_max = 3T`.
    pub fn for_horizon(horizon: f64) -> Result<Self> {
        Self::covering(horizon, DEFAULT_HORIZON_MULTIPLE * horizon)
    }

    /// Default resolution for `horizon`, extended to reach at least `t_max`.
    pub fn covering(horizon: f64, t_max: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("policy.T", format!("must be finite and > 0 (got {horizon})")));
        }
        let dt = horizon / DEFAULT_STEPS_PER_HORIZON as f64;
        let steps = (t_max.max(horizon) / dt).ceil();
        Self::new(steps * dt, dt)
    }

    pub fn len(&self) -> usize {
        (self.t_max / self.dt + SNAP_TOLERANCE).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Last tabulated time, `(len - 1) * dt`.
    pub fn last_t(&self) -> f64 {
        self.t(self.len() - 1)
    }

    /// Index of `t` if it coincides with a grid node.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.dt;
        let k = x.round();
        if k >= 0.0 && (x - k).abs() <= SNAP_TOLERANCE * x.max(1.0) && (k as usize) < self.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// `(k, frac)` with `t = (k + frac) dt`, `frac ∈ [0, 1)`; nodes snap exactly.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        if let Some(k) = self.index_of(t) {
            return (k, 0.0);
        }
        let x = (t / self.dt).max(0.0);
        let k = x.floor();
        (k as usize, x - k)
    }

    /// Number of nodes needed to evaluate quantities up to time `t`,
    /// including the node closing a partial cell.
    pub fn nodes_through(&self, t: f64) -> usize {
        let (k, frac) = self.locate(t);
        let n = if frac > 0.0 { k + 2 } else { k + 1 };
        n.min(self.len())
    }

    pub fn tabulate(&self, len: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..len).map(|k| f(self.t(k))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Cdf,
    Density,
    Plain,
}

/// A function tabulated at `t = 0, dt, 2dt, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dt: f64,
    values: Vec<f64>,
    kind: GridKind,
}

impl GridFunction {
    pub fn new(dt: f64, values: Vec<f64>, kind: GridKind) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be finite and > 0 (got {dt})")));
        }
        if values.len() < 2 {
            return Err(Error::invalid("values", "need at least two grid nodes"));
        }
        let f = Self { dt, values, kind };
        f.validate()?;
        Ok(f)
    }

    pub(crate) fn from_parts_unchecked(dt: f64, values: Vec<f64>, kind: GridKind) -> Self {
        Self { dt, values, kind }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("values[{k}]"), "not finite"));
        }
        match self.kind {
            GridKind::Cdf => {
                for (k, &v) in self.values.iter().enumerate() {
                    if !(-CDF_TOLERANCE..=1.0 + CDF_TOLERANCE).contains(&v) {
                        return Err(Error::invalid(format!("values[{k}]"), format!("CDF value {v} outside [0,1]")));
                    }
                }
                for (k, w) in self.values.windows(2).enumerate() {
                    if w[1] < w[0] - CDF_TOLERANCE {
                        return Err(Error::invalid(
                            format!("values[{}]", k + 1),
                            format!("CDF decreases from {} to {}", w[0], w[1]),
                        ));
                    }
                }
            }
            GridKind::Density => {
                if let Some(k) = self.values.iter().position(|&v| v < 0.0) {
                    return Err(Error::invalid(format!("values[{k}]"), "negative density"));
                }
                let mass = trapezoid(&self.values, self.dt);
                if mass > 1.0 + 1e-6 {
                    return Err(Error::invalid("values", format!("density integrates to {mass} > 1")));
                }
            }
            GridKind::Plain => {}
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid {
            t_max: self.t_max(),
            dt: self.dt,
        }
    }

    /// Linear interpolation; constant extension outside the tabulated range.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        let (k, frac) = self.grid().locate(t);
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Discrete derivative (one-sided at the ends, central inside).
    pub fn density(&self) -> GridFunction {
        let v = &self.values;
        let n = v.len();
        let mut d = Vec::with_capacity(n);
        d.push((v[1] - v[0]) / self.dt);
        for k in 1..n - 1 {
            d.push((v[k + 1] - v[k - 1]) / (2.0 * self.dt));
        }
        d.push((v[n - 1] - v[n - 2]) / self.dt);
        for x in &mut d {
            *x = x.max(0.0);
        }
        GridFunction::from_parts_unchecked(self.dt, d, GridKind::Density)
    }

    /// Cell masses: `[M(0), M(t_1) - M(0), ...]`.
    pub fn masses(&self) -> Vec<f64> {
        masses(&self.values, self.values.len() - 1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", k as f64 * self.dt, v)?;
        }
        Ok(())
    }
}

pub(crate) fn trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dt * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Cell masses of a tabulated CDF restricted to `[0, t_upto]`:
/// `out[0] = M(0)`, `out[j] = M(t_j) - M(t_{j-1})` for `1 ≤ j ≤ upto`.
pub(crate) fn masses(cdf: &[f64], upto: usize) -> Vec<f64> {
    let upto = upto.min(cdf.len() - 1);
    let mut out = Vec::with_capacity(upto + 1);
    out.push(cdf[0]);
    out.extend(cdf[..=upto].windows(2).map(|w| w[1] - w[0]));
    out
}

/// Grid-wide Stieltjes convolution
/// `out[k] = g(t_k) dM_0 + Σ_{j≥1} ½(g(t_{k-j}) + g(t_{k-j+1})) dM_j`
/// for `k < out_len`. `g` must hold at least `out_len` values.
pub(crate) fn convolve(g: &[f64], dm: &[f64], out_len: usize) -> Vec<f64> {
    assert!(g.len() >= out_len, "integrand shorter than output");
    let mut out = vec![0.0; out_len];
    if out_len == 0 {
        return out;
    }
    let gbar: Vec<f64> = g[..out_len].windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let atom = dm.first().copied().unwrap_or(0.0);
    let j_lo = match dm.iter().skip(1).position(|&m| m != 0.0) {
        Some(p) => p + 1,
        None => {
            for (o, &gk) in out.iter_mut().zip(g) {
                *o = gk * atom;
            }
            return out;
        }
    };
    let j_hi = dm.len() - 1;
    let kernel = |k: usize| -> f64 {
        let mut acc = if atom != 0.0 { g[k] * atom } else { 0.0 };
        if k >= j_lo {
            let jmax = k.min(j_hi);
            // Σ_{j=j_lo}^{jmax} gbar[k - j] * dm[j]
            let ms = &dm[j_lo..=jmax];
            let gs = &gbar[k - jmax..=k - j_lo];
            acc += ms.iter().zip(gs.iter().rev()).map(|(m, g)| m * g).sum::<f64>();
        }
        acc
    };
    let work = out_len.saturating_mul(j_hi - j_lo + 1);
    if work >= PARALLEL_WORK {
        out.par_chunks_mut(256).enumerate().for_each(|(c, chunk)| {
            for (i, o) in chunk.iter_mut().enumerate() {
                *o = kernel(c * 256 + i);
            }
        });
    } else {
        for (k, o) in out.iter_mut().enumerate() {
            *o = kernel(k);
        }
    }
    out
}

/// `∫_{[0, s_hi]} g(t - s) dM(s)` for a tabulated CDF `M` and an exact
/// integrand. `s_hi` may fall inside a cell; `M` is then interpolated
/// linearly across that cell.
pub(crate) fn stieltjes_at(grid: &Grid, cdf: &[f64], s_hi: f64, t: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut acc = g(t) * cdf[0];
    if s_hi <= 0.0 {
        return acc;
    }
    let (k, frac) = grid.locate(s_hi);
    let k_full = k.min(cdf.len() - 1);
    // skip the leading cells that carry no mass
    let start = cdf[..=k_full].iter().position(|&c| c != cdf[0]).unwrap_or(k_full + 1).max(1);
    let mut g_prev = g(t - grid.t(start - 1));
    for j in start..=k_full {
        let g_next = g(t - grid.t(j));
        acc += 0.5 * (g_prev + g_next) * (cdf[j] - cdf[j - 1]);
        g_prev = g_next;
    }
    if frac > 0.0 && k_full == k {
        assert!(k + 1 < cdf.len(), "measure not tabulated through partial cell");
        let m_hi = cdf[k] + frac * (cdf[k + 1] - cdf[k]);
        acc += 0.5 * (g_prev + g(t - s_hi)) * (m_hi - cdf[k]);
    }
    acc
}
