//! Finite-horizon quantities of the alternating geometric process on a grid.
//!
//! Notation: `X_i` on-times, `Y_i` off-times, `Z_i = X_i + Y_i` with CDF
//! `H_i`, `S_n = Z_1 + ... + Z_n` with CDF `G^n` (`G^0` is the unit step at
//! zero), `N(T)` the number of cycles completed by `T`. The failure epoch
//! `S_n + X_{n+1}` has CDF `K_n = G^n * F_{X_{n+1}}`.
//!
//! [`AgpAnalysis`] tabulates `G^n` (and `K_n`) on `[0, T]` lazily and
//! evaluates the series over `n` with explicit truncation control. Each
//! tabulated level is cached in a `OnceLock`, so an analysis can be shared
//! between threads and every level is computed exactly once.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric_process::AgpModel;
use crate::grid::{convolve, masses, stieltjes_at, Grid, GridFunction, GridKind};

/// Where the infinite sums over the cycle index stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTruncation {
    pub epsilon: f64,
    pub n_max: usize,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self {
            epsilon: 1e-9,
            n_max: 256,
        }
    }
}

impl SeriesTruncation {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("truncation.epsilon", format!("must be > 0 (got {})", self.epsilon)));
        }
        if self.n_max < 1 {
            return Err(Error::invalid("truncation.n_max", "must be >= 1"));
        }
        Ok(())
    }
}

/// Result of a truncated series with its audit trail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Index of the last term included.
    pub terms: usize,
    /// Bound on the last term included (what the stopping rule compared).
    pub last_term: f64,
    /// `|raw - value|` when the raw sum was clamped into `[0, 1]`.
    pub clamped_by: f64,
}

impl SeriesValue {
    fn plain(value: f64, terms: usize, last_term: f64) -> Self {
        Self {
            value,
            terms,
            last_term,
            clamped_by: 0.0,
        }
    }

    fn probability(raw: f64, terms: usize, last_term: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self {
            value,
            terms,
            last_term,
            clamped_by: (raw - value).abs(),
        }
    }
}

/// Tabulated CDF of the cycle length `Z_i` over the whole grid.
pub fn cycle_cdf(model: &AgpModel, i: usize, grid: &Grid) -> Result<GridFunction> {
    if i == 0 {
        return Err(Error::Domain("cycle index must be >= 1".into()));
    }
    let len = grid.len();
    let h = cycle_cdf_values(model, i, grid, len);
    Ok(GridFunction::from_parts_unchecked(grid.dt, h, GridKind::Cdf))
}

fn cycle_cdf_values(model: &AgpModel, i: usize, grid: &Grid, len: usize) -> Vec<f64> {
    let fx = grid.tabulate(len, |t| model.on().cdf_unchecked(i, t));
    let fy = grid.tabulate(len, |t| model.off().cdf_unchecked(i, t));
    convolve(&fx, &masses(&fy, len - 1), len)
}

/// `G^n = H_1 * ... * H_n` over the whole grid; use [`GridFunction::density`]
/// for `dG^n`.
pub fn convolve_g(model: &AgpModel, n: usize, grid: &Grid) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::Domain("convolution count must be >= 1".into()));
    }
    let len = grid.len();
    let mut g = cycle_cdf_values(model, 1, grid, len);
    for i in 2..=n {
        let h = cycle_cdf_values(model, i, grid, len);
        g = convolve(&g, &masses(&h, len - 1), len);
    }
    Ok(GridFunction::from_parts_unchecked(grid.dt, g, GridKind::Cdf))
}

/// Lazily tabulated convolution powers on `[0, T]` plus the series built on them.
#[derive(Debug)]
pub struct AgpAnalysis {
    model: AgpModel,
    grid: Grid,
    horizon: f64,
    horizon_index: usize,
    trunc: SeriesTruncation,
    // cycles[n - 1] = G^n on nodes 0..=horizon_index
    cycles: Vec<OnceLock<Vec<f64>>>,
    // failures[n] = K_n on nodes 0..=horizon_index
    failures: Vec<OnceLock<Vec<f64>>>,
}

impl AgpAnalysis {
    /// `horizon` (the warranty period `T`) must be a grid node.
    pub fn new(model: &AgpModel, grid: Grid, horizon: f64, trunc: SeriesTruncation) -> Result<Self> {
        trunc.validate()?;
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::invalid("policy.T", format!("must be finite and >= 0 (got {horizon})")));
        }
        let horizon_index = grid.index_of(horizon).ok_or_else(|| {
            Error::invalid(
                "grid",
                format!(
                    "T = {horizon} must be a grid node within [0, {}] (dt = {})",
                    grid.last_t(),
                    grid.dt
                ),
            )
        })?;
        let levels = trunc.n_max + 2;
        Ok(Self {
            model: model.clone(),
            grid,
            horizon,
            horizon_index,
            trunc,
            cycles: (0..levels).map(|_| OnceLock::new()).collect(),
            failures: (0..levels).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn model(&self) -> &AgpModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn truncation(&self) -> SeriesTruncation {
        self.trunc
    }

    fn prefix(&self) -> usize {
        self.horizon_index + 1
    }

    fn on_cdf(&self, i: usize, t: f64) -> f64 {
        self.model.on().cdf_unchecked(i, t)
    }

    fn off_cdf(&self, i: usize, t: f64) -> f64 {
        self.model.off().cdf_unchecked(i, t)
    }

    fn tab_on(&self, i: usize, len: usize) -> Vec<f64> {
        self.grid.tabulate(len, |t| self.on_cdf(i, t))
    }

    fn tab_off(&self, i: usize, len: usize) -> Vec<f64> {
        self.grid.tabulate(len, |t| self.off_cdf(i, t))
    }

    /// `G^n` on nodes `0..=T/dt`.
    pub fn cycle_sum_cdf(&self, n: usize) -> &[f64] {
        assert!(n >= 1 && n <= self.cycles.len(), "level {n} outside cache");
        let len = self.prefix();
        for m in 1..=n {
            self.cycles[m - 1].get_or_init(|| {
                let h = cycle_cdf_values(&self.model, m, &self.grid, len);
                if m == 1 {
                    h
                } else {
                    let prev = self.cycles[m - 2].get().expect("previous level initialised");
                    convolve(prev, &masses(&h, len - 1), len)
                }
            });
        }
        self.cycles[n - 1].get().unwrap()
    }

    /// `K_n` (CDF of the `(n+1)`-th failure epoch) on nodes `0..=T/dt`.
    pub fn failure_cdf(&self, n: usize) -> &[f64] {
        let len = self.prefix();
        self.failures[n].get_or_init(|| {
            let fx = self.tab_on(n + 1, len);
            if n == 0 {
                fx
            } else {
                let g = self.cycle_sum_cdf(n);
                convolve(&fx, &masses(g, len - 1), len)
            }
        })
    }

    /// `G^n(T)`, with `G^0(T) = 1`.
    pub fn g_at_horizon(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.cycle_sum_cdf(n)[self.horizon_index]
        }
    }

    fn check_time(&self, t: f64, what: &str) -> Result<()> {
        if !(t.is_finite() && t >= 0.0 && t <= self.horizon * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("{what}: t = {t} outside [0, T = {}]", self.horizon)));
        }
        Ok(())
    }

    fn truncation_error(&self, quantity: &'static str, last_term: f64) -> Error {
        Error::Truncation {
            quantity,
            n_max: self.trunc.n_max,
            last_term,
            epsilon: self.trunc.epsilon,
        }
    }

    /// Runs `term(n)` for `n = 1, 2, ...` until `G^n(at) < epsilon`.
    fn cycle_series(&self, quantity: &'static str, at: f64, mut term: impl FnMut(usize, &[f64]) -> f64) -> Result<(f64, usize, f64)> {
        let eps = self.trunc.epsilon;
        let grid = self.grid;
        let mut sum = 0.0;
        for n in 1..=self.trunc.n_max {
            let g = self.cycle_sum_cdf(n);
            let bound = interpolate(&grid, g, at);
            sum += term(n, g);
            if bound < eps {
                return Ok((sum, n, bound));
            }
            if n == self.trunc.n_max {
                return Err(self.truncation_error(quantity, bound));
            }
        }
        unreachable!()
    }

    /// `m_1(T) = Σ_{n≥1} G^n(T)`.
    pub fn expected_cycles(&self) -> Result<SeriesValue> {
        self.expected_cycles_at(self.horizon)
    }

    pub fn expected_cycles_at(&self, t: f64) -> Result<SeriesValue> {
        self.check_time(t, "expected_cycles")?;
        let grid = self.grid;
        let (sum, n, last) = self.cycle_series("expected_cycles", t, |_, g| interpolate(&grid, g, t))?;
        Ok(SeriesValue::plain(sum, n, last))
    }

    /// Probability of being operational at `t ≤ T`:
    /// `F̄_{X_1}(t) + Σ_n ∫_0^t F̄_{X_{n+1}}(t - s) dG^n(s)`.
    pub fn prob_on(&self, t: f64) -> Result<SeriesValue> {
        self.check_time(t, "prob_on")?;
        let first = 1.0 - self.on_cdf(1, t);
        let grid = self.grid;
        let (sum, n, last) = self.cycle_series("prob_on", t, |n, g| {
            stieltjes_at(&grid, g, t, t, |x| 1.0 - self.on_cdf(n + 1, x))
        })?;
        Ok(SeriesValue::probability(first + sum, n, last))
    }

    /// Probability of being under repair at `T`, computed from the failure
    /// epochs: `Σ_n P(S_n + X_{n+1} ≤ T < S_{n+1})`.
    pub fn prob_off(&self) -> Result<SeriesValue> {
        let grid = self.grid;
        let t = self.horizon;
        let off_term = |n: usize| {
            let k = self.failure_cdf(n);
            k[self.horizon_index] - stieltjes_at(&grid, k, t, t, |x| self.off_cdf(n + 1, x))
        };
        let first = off_term(0);
        let (sum, n, last) = self.cycle_series("prob_off", t, |n, _| off_term(n))?;
        Ok(SeriesValue::probability(first + sum, n, last))
    }

    /// `Σ_{n≥0} w^n · P(N(T) = n, on at T)` with stopping rule
    /// `w^n G^n(T) < epsilon · sum`.
    fn weighted_on_sum(&self, quantity: &'static str, weight: f64) -> Result<(f64, usize, f64)> {
        let grid = self.grid;
        let t = self.horizon;
        let eps = self.trunc.epsilon;
        let mut sum = 1.0 - self.on_cdf(1, t);
        let mut w = 1.0;
        for n in 1..=self.trunc.n_max {
            w *= weight;
            let g = self.cycle_sum_cdf(n);
            let p = stieltjes_at(&grid, g, t, t, |x| 1.0 - self.on_cdf(n + 1, x));
            sum += w * p;
            let bound = w * g[self.horizon_index];
            if bound < eps * sum.abs().max(f64::MIN_POSITIVE) || bound == 0.0 {
                return Ok((sum, n, bound));
            }
            if n == self.trunc.n_max {
                return Err(self.truncation_error(quantity, bound));
            }
        }
        unreachable!()
    }

    /// `E(Y_{N(T)+1} · 1{on at T}) = E(Y_1) {F̄_{X_1}(T) + Σ_n b^{-n} ∫ F̄_{X_{n+1}}(T - s) dG^n(s)}`.
    pub fn next_repair_on_weight(&self) -> Result<SeriesValue> {
        let (sum, n, last) = self.weighted_on_sum("expected_next_repair_given_on", 1.0 / self.model.b())?;
        Ok(SeriesValue::plain(self.model.off().base().mean() * sum, n, last))
    }

    /// `E(Y_{N(T)+1} | on at T)`.
    pub fn expected_next_repair_given_on(&self) -> Result<SeriesValue> {
        let weighted = self.next_repair_on_weight()?;
        let on = self.prob_on(self.horizon)?;
        if on.value <= 0.0 {
            return Err(Error::Domain("P(on at T) is zero; conditional mean undefined".into()));
        }
        Ok(SeriesValue {
            value: weighted.value / on.value,
            ..weighted
        })
    }

    /// `E(b^{-N(T)}) = Σ_{n≥0} b^{-n} (G^n(T) - G^{n+1}(T))`.
    pub fn expected_b_pow_neg_n(&self) -> Result<SeriesValue> {
        let b = self.model.b();
        if b == 1.0 {
            return Ok(SeriesValue::plain(1.0, 0, 0.0));
        }
        let eps = self.trunc.epsilon;
        let q = 1.0 / b;
        let mut w = 1.0;
        let mut sum = 0.0;
        let mut g_n = 1.0;
        for n in 0..=self.trunc.n_max {
            let g_next = self.g_at_horizon(n + 1);
            sum += w * (g_n - g_next);
            let bound = w * g_n;
            if n > 0 && (bound < eps * sum.abs().max(f64::MIN_POSITIVE) || bound == 0.0) {
                return Ok(SeriesValue::plain(sum, n, bound));
            }
            if n == self.trunc.n_max {
                return Err(self.truncation_error("expected_b_pow_neg_N", bound));
            }
            w *= q;
            g_n = g_next;
        }
        unreachable!()
    }

    /// `Σ_{m≥0} q^m G^m(T) = E(Σ_{i=1}^{N(T)+1} q^{i-1})`.
    pub fn geometric_weighted_count(&self, q: f64) -> Result<SeriesValue> {
        let eps = self.trunc.epsilon;
        let mut sum = 1.0;
        let mut w = 1.0;
        for n in 1..=self.trunc.n_max {
            w *= q;
            let g = self.g_at_horizon(n);
            sum += w * g;
            let bound = w * g;
            if bound < eps * sum || bound == 0.0 {
                return Ok(SeriesValue::plain(sum, n, bound));
            }
            if n == self.trunc.n_max {
                return Err(self.truncation_error("geometric_weighted_count", bound));
            }
        }
        unreachable!()
    }

    fn check_xi_time(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= self.horizon) {
            return Err(Error::Domain(format!("t = {t} must be >= T = {}", self.horizon)));
        }
        if t > self.grid.last_t() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("t = {t} beyond grid t_max = {}", self.grid.last_t())));
        }
        Ok(())
    }

    /// `P(S_{N(T)} + X_{N(T)+1} ≤ t, on at T)`.
    pub fn xi_on_numerator(&self, t: f64) -> Result<SeriesValue> {
        self.check_xi_time(t)?;
        let big_t = self.horizon;
        let shift = t - big_t;
        let first = (self.on_cdf(1, t) - self.on_cdf(1, big_t)).max(0.0);
        let grid = self.grid;
        let (sum, n, last) = self.cycle_series("cdf_xi_given_on", big_t, |n, g| {
            stieltjes_at(&grid, g, big_t, t, |x| self.on_cdf(n + 1, x) - self.on_cdf(n + 1, x - shift))
        })?;
        Ok(SeriesValue::probability(first + sum, n, last))
    }

    /// Repair-completion law beyond `T` for failures at or before `T`:
    /// `D_n(r) = P(S_n + X_{n+1} ≤ T < S_{n+1} ≤ r)`, tabulated on `len` nodes.
    fn repair_completion_beyond_horizon(&self, n: usize, len: usize) -> Vec<f64> {
        let k = self.failure_cdf(n);
        let fy = self.tab_off(n + 1, len);
        let mut d = convolve(&fy, &masses(k, self.horizon_index), len);
        let base = d[self.horizon_index];
        for (j, v) in d.iter_mut().enumerate() {
            *v = if j <= self.horizon_index { 0.0 } else { (*v - base).max(0.0) };
        }
        d
    }

    /// `P(S_{N(T)+1} + X_{N(T)+2} ≤ t, off at T)`.
    pub fn xi_off_numerator(&self, t: f64) -> Result<SeriesValue> {
        self.check_xi_time(t)?;
        let len = self.grid.nodes_through(t);
        let grid = self.grid;
        let term = |n: usize| {
            let d = self.repair_completion_beyond_horizon(n, len);
            stieltjes_at(&grid, &d, t, t, |x| self.on_cdf(n + 2, x))
        };
        let first = term(0);
        let (sum, n, last) = self.cycle_series("cdf_xi_given_off", self.horizon, |n, _| term(n))?;
        Ok(SeriesValue::probability(first + sum, n, last))
    }

    /// Conditional CDF of the next failure epoch given the item is on at `T`.
    pub fn cdf_xi_given_on(&self, t: f64) -> Result<SeriesValue> {
        let num = self.xi_on_numerator(t)?;
        let on = self.prob_on(self.horizon)?;
        Ok(conditional(num, on.value))
    }

    /// Conditional CDF of the failure after the repair in progress at `T`.
    pub fn cdf_xi_given_off(&self, t: f64) -> Result<SeriesValue> {
        let num = self.xi_off_numerator(t)?;
        let off = self.prob_off()?;
        Ok(conditional(num, off.value))
    }

    /// Both branch numerators tabulated on the first `len` grid nodes
    /// (zero up to `T`); their sum is the CDF of the first failure after `T`.
    pub fn xi_numerators_on_grid(&self, len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let len = len.min(self.grid.len());
        let kt = self.horizon_index;
        if len <= kt + 1 {
            return Ok((vec![0.0; len], vec![0.0; len]));
        }
        let f1_t = self.on_cdf(1, self.horizon);
        let mut on: Vec<f64> = (0..len)
            .map(|k| if k <= kt { 0.0 } else { (self.on_cdf(1, self.grid.t(k)) - f1_t).max(0.0) })
            .collect();
        let mut off = vec![0.0; len];
        let add_off = |n: usize, off: &mut Vec<f64>| {
            let d = self.repair_completion_beyond_horizon(n, len);
            let fx = self.tab_on(n + 2, len);
            let c = convolve(&fx, &masses(&d, len - 1), len);
            for (o, v) in off.iter_mut().zip(c) {
                *o += v;
            }
        };
        add_off(0, &mut off);
        let eps = self.trunc.epsilon;
        for n in 1..=self.trunc.n_max {
            let g = self.cycle_sum_cdf(n);
            let fx = self.tab_on(n + 1, len);
            let c = convolve(&fx, &masses(g, kt), len);
            let base = c[kt];
            for (o, v) in on.iter_mut().zip(&c).skip(kt + 1) {
                *o += (v - base).max(0.0);
            }
            add_off(n, &mut off);
            let bound = g[kt];
            if bound < eps {
                break;
            }
            if n == self.trunc.n_max {
                return Err(self.truncation_error("cdf_xi", bound));
            }
        }
        Ok((on, off))
    }
}

fn conditional(num: SeriesValue, denom: f64) -> SeriesValue {
    if denom <= 0.0 {
        return SeriesValue::probability(0.0, num.terms, num.last_term);
    }
    let raw = num.value / denom;
    let mut v = SeriesValue::probability(raw, num.terms, num.last_term);
    v.clamped_by += num.clamped_by;
    v
}

fn interpolate(grid: &Grid, values: &[f64], t: f64) -> f64 {
    let (k, frac) = grid.locate(t);
    if frac == 0.0 || k + 1 >= values.len() {
        values[k.min(values.len() - 1)]
    } else {
        values[k] + frac * (values[k + 1] - values[k])
    }
}

/// `m_1(T)` for a fresh analysis.
pub fn expected_cycles(model: &AgpModel, horizon: f64, grid: Grid, trunc: SeriesTruncation) -> Result<SeriesValue> {
    AgpAnalysis::new(model, grid, horizon, trunc)?.expected_cycles()
}

/// `P(on at t)`; `t` must be a grid node.
pub fn prob_on(model: &AgpModel, t: f64, grid: Grid, trunc: SeriesTruncation) -> Result<SeriesValue> {
    AgpAnalysis::new(model, grid, t, trunc)?.prob_on(t)
}

pub fn expected_next_repair_given_on(
    model: &AgpModel,
    horizon: f64,
    grid: Grid,
    trunc: SeriesTruncation,
) -> Result<SeriesValue> {
    AgpAnalysis::new(model, grid, horizon, trunc)?.expected_next_repair_given_on()
}

pub fn cdf_xi_given_on(model: &AgpModel, horizon: f64, t: f64, grid: Grid, trunc: SeriesTruncation) -> Result<SeriesValue> {
    AgpAnalysis::new(model, grid, horizon, trunc)?.cdf_xi_given_on(t)
}

pub fn cdf_xi_given_off(model: &AgpModel, horizon: f64, t: f64, grid: Grid, trunc: SeriesTruncation) -> Result<SeriesValue> {
    AgpAnalysis::new(model, grid, horizon, trunc)?.cdf_xi_given_off(t)
}

pub fn expected_b_pow_neg_n(model: &AgpModel, horizon: f64, grid: Grid, trunc: SeriesTruncation) -> Result<SeriesValue> {
    AgpAnalysis::new(model, grid, horizon, trunc)?.expected_b_pow_neg_n()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_model() -> AgpModel {
        AgpModel::exponential(0.0055, 1.1, 0.01, 0.95).unwrap()
    }

    fn renewal_model(l: f64, m: f64) -> AgpModel {
        AgpModel::exponential(l, 1.0, m, 1.0).unwrap()
    }

    fn availability(l: f64, m: f64, t: f64) -> f64 {
        m / (l + m) + l / (l + m) * (-(l + m) * t).exp()
    }

    #[test]
    fn cycle_cdf_matches_hypoexponential() {
        let (l, m) = (0.0055, 0.01);
        let model = renewal_model(l, m);
        let grid = Grid::for_horizon(1460.0).unwrap();
        let h = cycle_cdf(&model, 1, &grid).unwrap();
        assert_eq!(h.values()[0], 0.0);
        h.validate().unwrap();
        for k in (0..=4096).step_by(64) {
            let t = grid.t(k);
            let exact = 1.0 - (m * (-l * t).exp() - l * (-m * t).exp()) / (m - l);
            assert!((h.values()[k] - exact).abs() < 1e-4);
        }
        let hi = cycle_cdf(&reference_model(), 7, &grid).unwrap();
        hi.validate().unwrap();
        assert!(cycle_cdf(&model, 0, &grid).is_err());
    }

    /// Independent Erlang oracle: P(Gamma(k,1) ≤ t) = 1 - e^{-t} Σ_{j<k} t^j/j!.
    fn erlang_cdf(k: usize, t: f64) -> f64 {
        let mut term = 1.0;
        let mut s = 1.0;
        for j in 1..k {
            term *= t / j as f64;
            s += term;
        }
        1.0 - (-t).exp() * s
    }

    #[test]
    fn convolution_powers_match_erlang() {
        let model = renewal_model(1.0, 1.0);
        let grid = Grid::new(30.0, 10.0 / 4096.0).unwrap();
        let mut prev: Option<GridFunction> = None;
        for n in 1..=5 {
            let g = convolve_g(&model, n, &grid).unwrap();
            assert_eq!(g.values()[0], 0.0);
            let worst = (0..grid.len())
                .step_by(7)
                .map(|k| (g.values()[k] - erlang_cdf(2 * n, grid.t(k))).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "n={n}: {worst}");
            if let Some(p) = &prev {
                assert!(g.values().iter().zip(p.values()).all(|(a, b)| *a <= *b + 1e-15));
            }
            prev = Some(g);
        }
        assert!(convolve_g(&model, 0, &grid).is_err());
    }

    #[test]
    fn expected_cycles_matches_erlang_renewal_function() {
        let model = renewal_model(1.0, 1.0);
        let grid = Grid::new(30.0, 10.0 / 4096.0).unwrap();
        let an = AgpAnalysis::new(&model, grid, 10.0, SeriesTruncation::default()).unwrap();
        let m = an.expected_cycles().unwrap();
        let exact = 10.0 / 2.0 - (1.0 - (-20f64).exp()) / 4.0;
        assert!((m.value - exact).abs() < 2e-3, "{} vs {exact}", m.value);
        assert!(m.last_term < 1e-9);
        assert_eq!(an.expected_cycles_at(0.0).unwrap().value, 0.0);
        let mut last = 0.0;
        for k in (0..=4096).step_by(256) {
            let v = an.expected_cycles_at(grid.t(k)).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn prob_on_reduces_to_alternating_renewal_availability() {
        let (l, m) = (0.0055, 0.01);
        let model = renewal_model(l, m);
        let grid = Grid::for_horizon(1460.0).unwrap();
        let an = AgpAnalysis::new(&model, grid, 1460.0, SeriesTruncation::default()).unwrap();
        assert_eq!(an.prob_on(0.0).unwrap().value, 1.0);
        let p = an.prob_on(1460.0).unwrap();
        assert!((p.value - availability(l, m, 1460.0)).abs() < 1e-3);
        assert!(p.clamped_by < 1e-12);
        let off = an.prob_off().unwrap();
        assert!((p.value + off.value - 1.0).abs() < 1e-6, "{} + {}", p.value, off.value);
    }

    #[test]
    fn conditional_repair_mean_edge_cases() {
        let grid = Grid::for_horizon(1460.0).unwrap();
        let flat = AgpModel::exponential(0.0055, 1.1, 0.01, 1.0).unwrap();
        let an = AgpAnalysis::new(&flat, grid, 1460.0, SeriesTruncation::default()).unwrap();
        let v = an.expected_next_repair_given_on().unwrap();
        assert!((v.value - 100.0).abs() < 1e-6, "{}", v.value);

        let zero = AgpAnalysis::new(&reference_model(), grid, 0.0, SeriesTruncation::default()).unwrap();
        let v = zero.expected_next_repair_given_on().unwrap();
        assert!((v.value - 100.0).abs() < 1e-12);
        assert_eq!(zero.expected_b_pow_neg_n().unwrap().value, 1.0);
        assert_eq!(zero.prob_on(0.0).unwrap().value, 1.0);
    }

    #[test]
    fn b_pow_neg_n_trivial_cases() {
        let grid = Grid::for_horizon(1460.0).unwrap();
        let flat = AgpModel::exponential(0.0055, 1.1, 0.01, 1.0).unwrap();
        let an = AgpAnalysis::new(&flat, grid, 1460.0, SeriesTruncation::default()).unwrap();
        assert_eq!(an.expected_b_pow_neg_n().unwrap().value, 1.0);
        let an = AgpAnalysis::new(&reference_model(), grid, 1460.0, SeriesTruncation::default()).unwrap();
        let e = an.expected_b_pow_neg_n().unwrap().value;
        assert!(e > 1.0);
        // E(Σ_{m=0}^{N} b^{-m}) two ways
        let b = 0.95;
        let direct = an.geometric_weighted_count(1.0 / b).unwrap().value;
        assert!(((e - b) / (1.0 - b) - direct).abs() < 1e-7 * direct);
    }

    #[test]
    fn xi_conditionals_vanish_at_horizon_and_approach_one() {
        let model = reference_model();
        let grid = Grid::for_horizon(1460.0).unwrap();
        let an = AgpAnalysis::new(&model, grid, 1460.0, SeriesTruncation::default()).unwrap();
        assert_eq!(an.cdf_xi_given_on(1460.0).unwrap().value, 0.0);
        assert_eq!(an.cdf_xi_given_off(1460.0).unwrap().value, 0.0);
        let top = grid.last_t();
        assert!(an.cdf_xi_given_on(top).unwrap().value > 1.0 - 1e-6);
        assert!(an.cdf_xi_given_off(top).unwrap().value > 1.0 - 1e-4);
        assert!(an.cdf_xi_given_on(1000.0).is_err());
        assert!(an.cdf_xi_given_off(top + 1.0).is_err());
        // law of total probability: on and off parts make a CDF ≤ 1
        let t = 2000.0;
        let total = an.xi_on_numerator(t).unwrap().value + an.xi_off_numerator(t).unwrap().value;
        assert!(total > 0.0 && total <= 1.0);
    }

    #[test]
    fn xi_grid_tabulation_agrees_with_point_evaluation() {
        let model = reference_model();
        let grid = Grid::for_horizon(1460.0).unwrap();
        let an = AgpAnalysis::new(&model, grid, 1460.0, SeriesTruncation::default()).unwrap();
        let len = grid.nodes_through(2500.0);
        let (on, off) = an.xi_numerators_on_grid(len).unwrap();
        for t in [1460.0, 1600.0, 2000.0, 2400.0] {
            let k = grid.index_of(t).unwrap_or_else(|| grid.locate(t).0);
            let tk = grid.t(k);
            assert!((on[k] - an.xi_on_numerator(tk).unwrap().value).abs() < 1e-10);
            assert!((off[k] - an.xi_off_numerator(tk).unwrap().value).abs() < 1e-10);
        }
        for w in on.windows(2).chain(off.windows(2)) {
            assert!(w[1] >= w[0] - 1e-14);
        }
    }

    #[test]
    fn horizon_must_be_grid_node() {
        let grid = Grid::new(100.0, 0.3).unwrap();
        assert!(AgpAnalysis::new(&reference_model(), grid, 50.0, SeriesTruncation::default()).is_err());
        assert!(AgpAnalysis::new(&reference_model(), grid, 300.0, SeriesTruncation::default()).is_err());
        let bad = SeriesTruncation { epsilon: 0.0, n_max: 5 };
        assert!(AgpAnalysis::new(&reference_model(), grid, 30.0, bad).is_err());
    }

    #[test]
    fn truncation_failure_is_loud() {
        let model = renewal_model(1.0, 1.0);
        let grid = Grid::new(60.0, 0.05).unwrap();
        let tight = SeriesTruncation { epsilon: 1e-9, n_max: 5 };
        let an = AgpAnalysis::new(&model, grid, 20.0, tight).unwrap();
        assert!(matches!(an.expected_cycles(), Err(Error::Truncation { n_max: 5, .. })));
        assert!(matches!(an.prob_on(20.0), Err(Error::Truncation { .. })));
    }

    #[test]
    fn cycle_sum_ordering_invariant() {
        let an = AgpAnalysis::new(&reference_model(), Grid::for_horizon(1460.0).unwrap(), 1460.0, SeriesTruncation::default()).unwrap();
        for n in 1..15 {
            let a = an.cycle_sum_cdf(n).to_vec();
            let b = an.cycle_sum_cdf(n + 1);
            assert!(a.iter().zip(b).all(|(x, y)| *y <= *x + 1e-15 && *y >= -1e-15 && *x <= 1.0 + 1e-12));
        }
    }
}
