//! Warranty cost calculators.
//!
//! * non-renewing free-replacement (NRFRW): repairs in `(0, T]` are free;
//! * renewing (RFRW): every repair restarts a warranty of length `T`;
//! * restricted renewing (RRFRW(n)): as RFRW but with at most `n` repairs.
//!
//! Costs of a repair are `A + delta * Y_i`. Life-cycle costs multiply the
//! per-purchase cost by `m(L) + 1`, where `m` is the renewal function of the
//! time between purchases.

use serde::{Deserialize, Serialize};

use crate::agp_analytic::{AgpAnalysis, SeriesTruncation, SeriesValue};
use crate::error::{Error, Result};
use crate::geometric_process::{AgpModel, GeometricProcess};
use crate::grid::{convolve, masses, stieltjes_at, Grid, GridFunction, GridKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCost", into = "RawCost")]
pub struct CostParams {
    per_repair: f64,
    per_unit_time: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    #[serde(rename = "A")]
    per_repair: f64,
    delta: f64,
}

impl CostParams {
    pub fn new(per_repair: f64, per_unit_time: f64) -> Result<Self> {
        for (field, v) in [("cost.A", per_repair), ("cost.delta", per_unit_time)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, format!("must be finite and >= 0 (got {v})")));
            }
        }
        if per_repair == 0.0 && per_unit_time == 0.0 {
            return Err(Error::invalid("cost", "A and delta cannot both be zero"));
        }
        Ok(Self {
            per_repair,
            per_unit_time,
        })
    }

    /// Fixed cost `A` of each repair.
    pub fn per_repair(&self) -> f64 {
        self.per_repair
    }

    /// Cost `delta` per unit of repair time.
    pub fn per_unit_time(&self) -> f64 {
        self.per_unit_time
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.per_repair * factor, self.per_unit_time * factor)
    }

    /// Cost of one repair lasting `repair_time`.
    pub fn repair_cost(&self, repair_time: f64) -> f64 {
        self.per_repair + self.per_unit_time * repair_time
    }
}

impl TryFrom<RawCost> for CostParams {
    type Error = Error;

    fn try_from(raw: RawCost) -> Result<Self> {
        Self::new(raw.per_repair, raw.delta)
    }
}

impl From<CostParams> for RawCost {
    fn from(c: CostParams) -> Self {
        RawCost {
            per_repair: c.per_repair,
            delta: c.per_unit_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy", into = "RawPolicy")]
pub enum WarrantyPolicy {
    NonRenewing { period: f64 },
    Renewing { period: f64 },
    RestrictedRenewing { period: f64, max_repairs: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawPolicy {
    Nrfrw {
        #[serde(rename = "T")]
        period: f64,
    },
    Rfrw {
        #[serde(rename = "T")]
        period: f64,
    },
    Rrfrw {
        #[serde(rename = "T")]
        period: f64,
        n: usize,
    },
}

impl WarrantyPolicy {
    pub fn validate(&self) -> Result<()> {
        let period = self.period();
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid("policy.T", format!("must be finite and > 0 (got {period})")));
        }
        if let WarrantyPolicy::RestrictedRenewing { max_repairs: 0, .. } = self {
            return Err(Error::invalid("policy.n", "must be >= 1"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        match *self {
            WarrantyPolicy::NonRenewing { period }
            | WarrantyPolicy::Renewing { period }
            | WarrantyPolicy::RestrictedRenewing { period, .. } => period,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            WarrantyPolicy::NonRenewing { .. } => "nrfrw",
            WarrantyPolicy::Renewing { .. } => "rfrw",
            WarrantyPolicy::RestrictedRenewing { .. } => "rrfrw",
        }
    }
}

impl TryFrom<RawPolicy> for WarrantyPolicy {
    type Error = Error;

    fn try_from(raw: RawPolicy) -> Result<Self> {
        let p = match raw {
            RawPolicy::Nrfrw { period } => WarrantyPolicy::NonRenewing { period },
            RawPolicy::Rfrw { period } => WarrantyPolicy::Renewing { period },
            RawPolicy::Rrfrw { period, n } => WarrantyPolicy::RestrictedRenewing { period, max_repairs: n },
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<WarrantyPolicy> for RawPolicy {
    fn from(p: WarrantyPolicy) -> Self {
        match p {
            WarrantyPolicy::NonRenewing { period } => RawPolicy::Nrfrw { period },
            WarrantyPolicy::Renewing { period } => RawPolicy::Rfrw { period },
            WarrantyPolicy::RestrictedRenewing { period, max_repairs } => RawPolicy::Rrfrw { period, n: max_repairs },
        }
    }
}

/// `min_length` (L*) is the time after which the consumer stops buying;
/// `length` (L) is the life-cycle length plugged into the analytic formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLifeCycle", into = "RawLifeCycle")]
pub struct LifeCycleParams {
    min_length: f64,
    length: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLifeCycle {
    #[serde(rename = "L_star")]
    min_length: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
}

impl LifeCycleParams {
    pub fn new(min_length: f64, length: f64) -> Result<Self> {
        if !(min_length.is_finite() && min_length > 0.0) {
            return Err(Error::invalid("life_cycle.L_star", format!("must be finite and > 0 (got {min_length})")));
        }
        if !(length.is_finite() && length >= min_length) {
            return Err(Error::invalid("life_cycle.L", format!("must be >= L_star = {min_length} (got {length})")));
        }
        Ok(Self { min_length, length })
    }

    pub fn min_length(&self) -> f64 {
        self.min_length
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.min_length, length)
    }
}

impl TryFrom<RawLifeCycle> for LifeCycleParams {
    type Error = Error;

    fn try_from(raw: RawLifeCycle) -> Result<Self> {
        Self::new(raw.min_length, raw.length.unwrap_or(raw.min_length))
    }
}

impl From<LifeCycleParams> for RawLifeCycle {
    fn from(l: LifeCycleParams) -> Self {
        RawLifeCycle {
            min_length: l.min_length,
            length: Some(l.length),
        }
    }
}

/// `E(C_i) = A + delta E(Y_1) / b^{i-1}`.
pub fn expected_claim_cost(cost: &CostParams, off: &GeometricProcess, i: usize) -> Result<f64> {
    Ok(cost.per_repair + cost.per_unit_time * off.mean(i)?)
}

/// Components of the NRFRW expected cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NrfrwCost {
    /// `E(C(T))`.
    pub expected_cost: f64,
    /// `E(Σ_{i=1}^{N(T)+1} C_i)`: every cycle started by `T` is charged.
    pub cost_through_next_claim: f64,
    /// `m_1(T)`.
    pub expected_cycles: SeriesValue,
    pub prob_on: SeriesValue,
    /// `E(b^{-N(T)})` (1 when `b = 1`).
    pub b_pow_neg_n: SeriesValue,
    /// `E(Y_{N(T)+1} | on at T)`.
    pub next_repair_given_on: f64,
}

/// Expected NRFRW cost over `(0, T]`.
pub fn expected_cost_nrfrw(model: &AgpModel, cost: &CostParams, period: f64, grid: Grid, trunc: SeriesTruncation) -> Result<f64> {
    let analysis = AgpAnalysis::new(model, grid, period, trunc)?;
    Ok(nrfrw_cost(&analysis, cost)?.expected_cost)
}

/// NRFRW cost with its components, reusing a prepared analysis.
pub fn nrfrw_cost(analysis: &AgpAnalysis, cost: &CostParams) -> Result<NrfrwCost> {
    let model = analysis.model();
    let b = model.b();
    let mean_off = model.off().base().mean();
    let (a_cost, d_cost) = (cost.per_repair, cost.per_unit_time);

    let cycles = analysis.expected_cycles()?;
    let on = analysis.prob_on(analysis.horizon())?;
    let b_pow = analysis.expected_b_pow_neg_n()?;
    let next_on = analysis.next_repair_on_weight()?;

    let repair_time_through_next = if b == 1.0 {
        mean_off * (cycles.value + 1.0)
    } else {
        mean_off * (b_pow.value - b) / (1.0 - b)
    };
    let through_next = a_cost * (cycles.value + 1.0) + d_cost * repair_time_through_next;
    let uncovered = a_cost * on.value + d_cost * next_on.value;
    Ok(NrfrwCost {
        expected_cost: through_next - uncovered,
        cost_through_next_claim: through_next,
        expected_cycles: cycles,
        prob_on: on,
        b_pow_neg_n: b_pow,
        next_repair_given_on: if on.value > 0.0 { next_on.value / on.value } else { f64::NAN },
    })
}

/// Mean length of the cycles started by `T`,
/// `E(Σ_{i=1}^{N(T)+1} Z_i) / (m_1(T) + 1)`.
pub fn mean_cycle_length(analysis: &AgpAnalysis) -> Result<f64> {
    let model = analysis.model();
    let on = analysis.geometric_weighted_count(1.0 / model.a())?.value * model.on().base().mean();
    let off = analysis.geometric_weighted_count(1.0 / model.b())?.value * model.off().base().mean();
    Ok((on + off) / (analysis.expected_cycles()?.value + 1.0))
}

/// CDF of the time to the first failure after `T` (the repurchase
/// interval under NRFRW) at `t ≥ T`.
pub fn cdf_xi(model: &AgpModel, period: f64, t: f64, grid: Grid, trunc: SeriesTruncation) -> Result<f64> {
    if t < period {
        return Err(Error::Domain(format!("t = {t} must be >= T = {period}")));
    }
    let analysis = AgpAnalysis::new(model, grid, period, trunc)?;
    let on = analysis.xi_on_numerator(t)?;
    let off = analysis.xi_off_numerator(t)?;
    Ok((on.value + off.value).clamp(0.0, 1.0))
}

/// Repurchase-interval CDF on the first `len` nodes of the analysis grid.
pub fn cdf_xi_grid(analysis: &AgpAnalysis, len: usize) -> Result<GridFunction> {
    let (on, off) = analysis.xi_numerators_on_grid(len)?;
    let values = on.iter().zip(&off).map(|(a, b)| (a + b).clamp(0.0, 1.0)).collect();
    Ok(GridFunction::from_parts_unchecked(analysis.grid().dt, values, GridKind::Cdf))
}

/// Renewal function `m(t) = F(t) + ∫_0^t m(t - s) dF(s)` at every node of `cdf`.
///
/// Implicit trapezoid recursion: the `j = 1` cell involves `m(t_k)` itself,
/// which is moved to the left-hand side.
pub fn renewal_function_grid(cdf: &GridFunction) -> Result<GridFunction> {
    if cdf.kind() != GridKind::Cdf {
        return Err(Error::Domain("renewal function needs a CDF".into()));
    }
    cdf.validate()?;
    let f = cdf.values();
    let df = masses(f, f.len() - 1);
    let atom = df[0];
    let d1 = df.get(1).copied().unwrap_or(0.0);
    let denom = 1.0 - atom - 0.5 * d1;
    if denom <= 0.0 {
        return Err(Error::Domain("interarrival law has too much mass at zero".into()));
    }
    let j_lo = df.iter().skip(2).position(|&m| m != 0.0).map(|p| p + 2);
    let mut m = Vec::with_capacity(f.len());
    m.push(f[0] / (1.0 - atom));
    for k in 1..f.len() {
        let mut rhs = f[k] + 0.5 * m[k - 1] * d1;
        if let Some(lo) = j_lo {
            for j in lo..=k {
                rhs += 0.5 * (m[k - j] + m[k - j + 1]) * df[j];
            }
        }
        m.push(rhs / denom);
    }
    Ok(GridFunction::from_parts_unchecked(cdf.dt(), m, GridKind::Plain))
}

/// `m(L)` for the renewal process with interarrival CDF `cdf`.
pub fn renewal_function(cdf: &GridFunction, length: f64) -> Result<f64> {
    if !(length.is_finite() && length >= 0.0) || length > cdf.t_max() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("L = {length} outside [0, {}]", cdf.t_max())));
    }
    Ok(renewal_function_grid(cdf)?.value_at(length))
}

/// Life-cycle cost `(m(L) + 1) E(per-purchase cost)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifeCycleCost {
    pub expected_cost: f64,
    pub per_purchase: f64,
    /// `m(L)`: expected number of repurchases by `L`.
    pub repurchases: f64,
    pub length: f64,
}

fn life_cycle_grid(grid: Grid, period: f64, length: f64) -> Result<Grid> {
    if length > grid.last_t() * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "grid.t_max",
            format!("grid ends at {} but L = {length}", grid.last_t()),
        ));
    }
    if grid.index_of(period).is_none() {
        return Err(Error::invalid("grid", format!("T = {period} must be a grid node")));
    }
    Ok(grid)
}

pub fn expected_cost_life_cycle_nrfrw(
    model: &AgpModel,
    cost: &CostParams,
    period: f64,
    lc: &LifeCycleParams,
    grid: Grid,
    trunc: SeriesTruncation,
) -> Result<LifeCycleCost> {
    let grid = life_cycle_grid(grid, period, lc.length)?;
    let analysis = AgpAnalysis::new(model, grid, period, trunc)?;
    life_cycle_nrfrw(&analysis, cost, lc.length)
}

/// Life-cycle NRFRW cost from a prepared analysis whose grid covers `length`.
pub fn life_cycle_nrfrw(analysis: &AgpAnalysis, cost: &CostParams, length: f64) -> Result<LifeCycleCost> {
    let grid = life_cycle_grid(*analysis.grid(), analysis.horizon(), length)?;
    let per_purchase = nrfrw_cost(analysis, cost)?.expected_cost;
    let xi = cdf_xi_grid(analysis, grid.nodes_through(length))?;
    let repurchases = renewal_function(&xi, length)?;
    Ok(LifeCycleCost {
        expected_cost: (repurchases + 1.0) * per_purchase,
        per_purchase,
        repurchases,
        length,
    })
}

/// `F_{X_k}(T)` for `k = 1..=count`.
fn covered_failure_probs(model: &AgpModel, period: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| model.on().cdf_unchecked(k, period)).collect()
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("policy.T", format!("must be finite and > 0 (got {period})")))
    }
}

/// One atom of a warranty cost distribution: `repairs` covered repairs with
/// expected total cost `cost`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostAtom {
    pub repairs: usize,
    pub cost: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostDistribution {
    pub atoms: Vec<CostAtom>,
    /// Probability of more repairs than the listed atoms cover.
    pub residual: f64,
}

/// Atoms `0..=max_repairs` of the RFRW repair-count law: exactly `k` repairs
/// happen when `X_1..X_k ≤ T < X_{k+1}`. The residual is `P(X_1..X_{K+1} ≤ T)`.
pub fn rfrw_cost_distribution(model: &AgpModel, cost: &CostParams, period: f64, max_repairs: usize) -> Result<CostDistribution> {
    check_period(period)?;
    if max_repairs < 1 {
        return Err(Error::invalid("K", "must be >= 1"));
    }
    let f = covered_failure_probs(model, period, max_repairs + 1);
    let mut atoms = Vec::with_capacity(max_repairs + 1);
    let mut reach = 1.0;
    let mut total = 0.0;
    for (k, &covered) in f.iter().enumerate().take(max_repairs + 1) {
        if k > 0 {
            total += expected_claim_cost(cost, model.off(), k)?;
        }
        atoms.push(CostAtom {
            repairs: k,
            cost: total,
            probability: reach * (1.0 - covered),
        });
        reach *= covered;
    }
    Ok(CostDistribution { atoms, residual: reach })
}

/// RRFRW(n) repair-count law: atoms `0..n`, the last one absorbing every
/// path with `n` covered failures.
pub fn rrfrw_cost_distribution(model: &AgpModel, cost: &CostParams, period: f64, max_repairs: usize) -> Result<CostDistribution> {
    let mut dist = rfrw_cost_distribution(model, cost, period, max_repairs)?;
    let last = dist.atoms.last_mut().expect("at least two atoms");
    last.probability += dist.residual;
    dist.residual = 0.0;
    Ok(dist)
}

/// Partial sums of the RFRW expected-cost series and its term ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfrwPartialSums {
    /// `sums[k - 1] = Σ_{j ≤ k} E(C_j) Π_{i ≤ j} F_{X_i}(T)`.
    pub sums: Vec<f64>,
    /// `ratios[k - 1] = term_{k+1} / term_k`.
    pub ratios: Vec<f64>,
    /// Smallest `k` with `ratios[j - 1] > 1` for every observed `j ≥ k`.
    pub divergence_from: Option<usize>,
    /// First `k` whose partial sum would overflow; the lists stop before it.
    pub overflow_at: Option<usize>,
}

pub fn rfrw_partial_sums(model: &AgpModel, cost: &CostParams, period: f64, count: usize) -> Result<RfrwPartialSums> {
    check_period(period)?;
    if count < 1 {
        return Err(Error::invalid("K", "must be >= 1"));
    }
    let f = covered_failure_probs(model, period, count);
    let mut sums = Vec::with_capacity(count);
    let mut terms = Vec::with_capacity(count);
    let mut reach = 1.0;
    let mut sum = 0.0;
    let mut overflow_at = None;
    for k in 1..=count {
        reach *= f[k - 1];
        let term = expected_claim_cost(cost, model.off(), k)? * reach;
        if !(sum + term).is_finite() {
            overflow_at = Some(k);
            break;
        }
        sum += term;
        sums.push(sum);
        terms.push(term);
    }
    let ratios: Vec<f64> = terms.windows(2).map(|w| w[1] / w[0]).collect();
    let divergence_from = match ratios.iter().rposition(|&r| r <= 1.0 || r.is_nan()) {
        None if !ratios.is_empty() => Some(1),
        None => None,
        Some(p) if p + 1 < ratios.len() => Some(p + 2),
        Some(_) => None,
    };
    Ok(RfrwPartialSums {
        sums,
        ratios,
        divergence_from,
        overflow_at,
    })
}

/// `Σ_{k=1}^{n} E(C_k) Π_{j ≤ k} F_{X_j}(T)`.
pub fn expected_cost_rrfrw(model: &AgpModel, cost: &CostParams, period: f64, max_repairs: usize) -> Result<f64> {
    check_period(period)?;
    if max_repairs < 1 {
        return Err(Error::invalid("policy.n", "must be >= 1"));
    }
    let mut reach = 1.0;
    let mut sum = 0.0;
    for k in 1..=max_repairs {
        reach *= model.on().cdf_unchecked(k, period);
        sum += expected_claim_cost(cost, model.off(), k)? * reach;
    }
    Ok(sum)
}

/// Walks the cycle-sum tables needed for the RRFRW repurchase interval.
///
/// With `constrained`, level `i` is `P(S_i ≤ s, X_1..X_i ≤ T)`, the law of
/// `S_i` on the paths that actually reach a covered `i`-th repair. Otherwise
/// it is the plain `G^i`.
fn for_each_cycle_level(
    model: &AgpModel,
    period_index: usize,
    levels: usize,
    grid: &Grid,
    len: usize,
    constrained: bool,
    mut visit: impl FnMut(usize, &[f64]),
) {
    let mut level: Vec<f64> = Vec::new();
    for i in 1..=levels {
        let fx = grid.tabulate(len, |t| model.on().cdf_unchecked(i, t));
        let fy = grid.tabulate(len, |t| model.off().cdf_unchecked(i, t));
        let upto = if constrained { period_index } else { len - 1 };
        let h = convolve(&fy, &masses(&fx, upto), len);
        level = if i == 1 { h } else { convolve(&level, &masses(&h, len - 1), len) };
        visit(i, &level);
    }
}

fn xi_n_point(model: &AgpModel, period: f64, n: usize, t: f64, grid: Grid, constrained: bool) -> Result<f64> {
    check_period(period)?;
    if n < 1 {
        return Err(Error::invalid("policy.n", "must be >= 1"));
    }
    if !(t.is_finite() && t >= 0.0) || t > grid.last_t() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("t = {t} outside [0, {}]", grid.last_t())));
    }
    let kt = grid
        .index_of(period)
        .ok_or_else(|| Error::invalid("grid", format!("T = {period} must be a grid node")))?;
    let on = model.on();
    let beyond = |i: usize, x: f64| (on.cdf_unchecked(i, x) - on.cdf_unchecked(i, period)).max(0.0);
    let mut total = beyond(1, t);
    let len = grid.nodes_through(t);
    for_each_cycle_level(model, kt, n, &grid, len, constrained, |i, level| {
        total += if i < n {
            stieltjes_at(&grid, level, t, t, |x| beyond(i + 1, x))
        } else {
            stieltjes_at(&grid, level, t, t, |x| on.cdf_unchecked(n + 1, x))
        };
    });
    Ok(total.clamp(0.0, 1.0))
}

fn xi_n_grid(model: &AgpModel, period: f64, n: usize, grid: Grid, len: usize, constrained: bool) -> Result<GridFunction> {
    check_period(period)?;
    if n < 1 {
        return Err(Error::invalid("policy.n", "must be >= 1"));
    }
    let kt = grid
        .index_of(period)
        .ok_or_else(|| Error::invalid("grid", format!("T = {period} must be a grid node")))?;
    let len = len.min(grid.len());
    let on = model.on();
    let beyond = |i: usize| {
        let at_period = on.cdf_unchecked(i, period);
        grid.tabulate(len, |x| (on.cdf_unchecked(i, x) - at_period).max(0.0))
    };
    let mut total = beyond(1);
    for_each_cycle_level(model, kt, n, &grid, len, constrained, |i, level| {
        let integrand = if i < n {
            beyond(i + 1)
        } else {
            grid.tabulate(len, |x| on.cdf_unchecked(n + 1, x))
        };
        for (o, v) in total.iter_mut().zip(convolve(&integrand, &masses(level, len - 1), len)) {
            *o += v;
        }
    });
    for v in &mut total {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(GridFunction::from_parts_unchecked(grid.dt, total, GridKind::Cdf))
}

/// CDF at `t` of the time to the first off-warranty failure under RRFRW(n):
/// the first on-time exceeding `T` among the first `n`, or the failure after
/// the `n`-th covered repair.
pub fn cdf_xi_n(model: &AgpModel, period: f64, n: usize, t: f64, grid: Grid) -> Result<f64> {
    xi_n_point(model, period, n, t, grid, true)
}

/// Same expansion with the plain cycle sums `G^i`, which ignore the condition
/// that `X_1..X_i ≤ T` on the paths reaching the `i`-th repair. It agrees with
/// [`cdf_xi_n`] only when `F_{X_i}(T)` is close to 1; elsewhere its total mass
/// exceeds one.
pub fn cdf_xi_n_unconstrained(model: &AgpModel, period: f64, n: usize, t: f64, grid: Grid) -> Result<f64> {
    xi_n_point(model, period, n, t, grid, false)
}

/// [`cdf_xi_n`] on the first `len` nodes of `grid`.
pub fn cdf_xi_n_grid(model: &AgpModel, period: f64, n: usize, grid: Grid, len: usize) -> Result<GridFunction> {
    xi_n_grid(model, period, n, grid, len, true)
}

pub fn cdf_xi_n_unconstrained_grid(model: &AgpModel, period: f64, n: usize, grid: Grid, len: usize) -> Result<GridFunction> {
    xi_n_grid(model, period, n, grid, len, false)
}

pub fn expected_cost_life_cycle_rrfrw(
    model: &AgpModel,
    cost: &CostParams,
    period: f64,
    max_repairs: usize,
    lc: &LifeCycleParams,
    grid: Grid,
) -> Result<LifeCycleCost> {
    let grid = life_cycle_grid(grid, period, lc.length)?;
    let per_purchase = expected_cost_rrfrw(model, cost, period, max_repairs)?;
    let xi = cdf_xi_n_grid(model, period, max_repairs, grid, grid.nodes_through(lc.length))?;
    let repurchases = renewal_function(&xi, lc.length)?;
    Ok(LifeCycleCost {
        expected_cost: (repurchases + 1.0) * per_purchase,
        per_purchase,
        repurchases,
        length: lc.length,
    })
}
