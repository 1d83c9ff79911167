//! Evaluation of configured experiments and their CSV / text rendering.

use std::fmt::Write as _;
use std::io::Write;

use agpw_core::agp_analytic::{AgpAnalysis, SeriesValue};
use agpw_core::montecarlo::{estimate_vec, life_cycle_cost, observe_nrfrw, rfrw_outcome, Estimate};
use agpw_core::warranty::{
    expected_cost_life_cycle_rrfrw, expected_cost_rrfrw, life_cycle_nrfrw, mean_cycle_length, nrfrw_cost,
    rfrw_partial_sums, rrfrw_cost_distribution, CostDistribution, LifeCycleCost, RfrwPartialSums,
};
use agpw_core::WarrantyPolicy;
use serde::Serialize;
use serde_json::Value;

use crate::config::{expand, ExperimentConfig, SweepPoint};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Simulate,
    Both,
}

impl Mode {
    fn analytic(self) -> bool {
        self != Mode::Simulate
    }

    fn simulate(self) -> bool {
        self != Mode::Analytic
    }
}

/// Largest truncation diagnostics over the series used for one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    pub terms: usize,
    pub last_term: f64,
    pub clamped_by: f64,
}

impl SeriesDiagnostics {
    fn absorb(&mut self, v: &SeriesValue) {
        self.terms = self.terms.max(v.terms);
        self.last_term = self.last_term.max(v.last_term);
        self.clamped_by = self.clamped_by.max(v.clamped_by);
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Outcome {
    pub cost_analytic: Option<f64>,
    pub expected_cycles: Option<f64>,
    pub prob_on: Option<f64>,
    pub mean_cycle_length: Option<f64>,
    pub series: Option<SeriesDiagnostics>,
    pub partial_sums: Option<RfrwPartialSums>,
    pub repair_distribution: Option<CostDistribution>,
    pub life_cycle_analytic: Option<LifeCycleCost>,
    pub cost_mc: Option<Estimate>,
    pub life_cycle_mc: Option<Estimate>,
    pub life_length_mc: Option<Estimate>,
    pub purchases_mc: Option<Estimate>,
    /// Analytic life-cycle cost with `L` set to the simulated mean length.
    pub life_cycle_at_mc_length: Option<f64>,
}

pub fn evaluate(config: &ExperimentConfig, mode: Mode) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let grid = config.grid()?;
    let period = config.policy.period();
    let (model, cost) = (&config.model, &config.cost);

    if mode.analytic() {
        let analysis = AgpAnalysis::new(model, grid, period, config.truncation)?;
        let cycles = analysis.expected_cycles()?;
        let mut diag = SeriesDiagnostics::default();
        diag.absorb(&cycles);
        out.expected_cycles = Some(cycles.value);
        out.mean_cycle_length = Some(mean_cycle_length(&analysis)?);
        match config.policy {
            WarrantyPolicy::NonRenewing { .. } => {
                let c = nrfrw_cost(&analysis, cost)?;
                for v in [&c.prob_on, &c.b_pow_neg_n] {
                    diag.absorb(v);
                }
                out.cost_analytic = Some(c.expected_cost);
                out.prob_on = Some(c.prob_on.value);
                if let Some(lc) = config.life_cycle {
                    out.life_cycle_analytic = Some(life_cycle_nrfrw(&analysis, cost, lc.length())?);
                }
            }
            WarrantyPolicy::Renewing { .. } => {
                out.partial_sums = Some(rfrw_partial_sums(model, cost, period, config.rfrw_terms)?);
            }
            WarrantyPolicy::RestrictedRenewing { max_repairs, .. } => {
                out.cost_analytic = Some(expected_cost_rrfrw(model, cost, period, max_repairs)?);
                out.repair_distribution = Some(rrfrw_cost_distribution(model, cost, period, max_repairs)?);
                if let Some(lc) = config.life_cycle {
                    out.life_cycle_analytic =
                        Some(expected_cost_life_cycle_rrfrw(model, cost, period, max_repairs, &lc, grid)?);
                }
            }
        }
        out.series = Some(diag);
    }

    if mode.simulate() {
        let sim = &config.sim;
        let [c] = match config.policy {
            WarrantyPolicy::NonRenewing { .. } => {
                estimate_vec(sim, |r| Ok([observe_nrfrw(cost, period, &mut r.item(model, 0)).cost]))?
            }
            WarrantyPolicy::Renewing { .. } => {
                estimate_vec(sim, |r| Ok([rfrw_outcome(cost, period, None, &mut r.item(model, 0))?.cost]))?
            }
            WarrantyPolicy::RestrictedRenewing { max_repairs, .. } => estimate_vec(sim, |r| {
                Ok([rfrw_outcome(cost, period, Some(max_repairs as u64), &mut r.item(model, 0))?.cost])
            })?,
        };
        out.cost_mc = Some(c);
        let renewing = matches!(config.policy, WarrantyPolicy::Renewing { .. });
        if let (Some(lc), false) = (config.life_cycle, renewing) {
            let [lc_cost, length, purchases] = estimate_vec(sim, |r| {
                let o = life_cycle_cost(model, cost, &config.policy, lc.min_length(), r)?;
                Ok([o.cost, o.length, o.purchases as f64])
            })?;
            out.life_cycle_mc = Some(lc_cost);
            out.life_length_mc = Some(length);
            out.purchases_mc = Some(purchases);
            if mode.analytic() && length.mean <= grid.last_t() {
                let at = lc.with_length(length.mean.max(lc.min_length()))?;
                let v = match config.policy {
                    WarrantyPolicy::RestrictedRenewing { max_repairs, .. } => {
                        expected_cost_life_cycle_rrfrw(model, cost, period, max_repairs, &at, grid)?
                    }
                    _ => {
                        let analysis = AgpAnalysis::new(model, grid, period, config.truncation)?;
                        life_cycle_nrfrw(&analysis, cost, at.length())?
                    }
                };
                out.life_cycle_at_mc_length = Some(v.expected_cost);
            }
        }
    }
    Ok(out)
}

/// Expands and evaluates every point of `document`, in sweep order.
pub fn run_document(document: &Value, mode: Mode, sweep_limit: usize) -> Result<Vec<(SweepPoint, Outcome)>, CliError> {
    let points = expand(document, sweep_limit)?;
    points
        .into_iter()
        .map(|p| {
            let out = evaluate(&p.config, mode)?;
            Ok((p, out))
        })
        .collect()
}

fn columns(policy: &WarrantyPolicy) -> &'static [&'static str] {
    match policy {
        WarrantyPolicy::NonRenewing { .. } => &[
            "policy", "T", "cost_analytic", "cost_mc", "cost_mc_se", "mc_n", "z", "expected_cycles", "prob_on",
            "mean_cycle_length", "series_terms", "series_last_term", "clamped_by", "lc_L", "lc_analytic", "lc_mc",
            "lc_mc_se", "lc_mc_mean_L", "lc_analytic_at_mc_L", "seed", "config",
        ],
        WarrantyPolicy::RestrictedRenewing { .. } => &[
            "policy", "T", "n", "cost_analytic", "cost_mc", "cost_mc_se", "mc_n", "z", "expected_cycles",
            "mean_cycle_length", "series_terms", "series_last_term", "clamped_by", "lc_L", "lc_analytic", "lc_mc",
            "lc_mc_se", "lc_mc_mean_L", "lc_analytic_at_mc_L", "seed", "config",
        ],
        WarrantyPolicy::Renewing { .. } => &[
            "policy", "T", "K", "partial_sum_K", "divergence_from", "overflow_at", "expected_cycles",
            "mean_cycle_length", "series_terms", "series_last_term", "clamped_by", "cost_mc", "cost_mc_se", "mc_n",
            "seed", "config",
        ],
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn field(name: &str, point: &SweepPoint, out: &Outcome) -> String {
    let c = &point.config;
    let lc_len = out.life_cycle_analytic.map(|l| l.length).or(c.life_cycle.map(|l| l.length()));
    match name {
        "policy" => c.policy.kind_name().to_string(),
        "T" => c.policy.period().to_string(),
        "n" => match c.policy {
            WarrantyPolicy::RestrictedRenewing { max_repairs, .. } => max_repairs.to_string(),
            _ => String::new(),
        },
        "K" => out.partial_sums.as_ref().map(|p| p.sums.len().to_string()).unwrap_or_default(),
        "partial_sum_K" => num(out.partial_sums.as_ref().and_then(|p| p.sums.last().copied())),
        "divergence_from" => out.partial_sums.as_ref().and_then(|p| p.divergence_from).map(|k| k.to_string()).unwrap_or_default(),
        "overflow_at" => out.partial_sums.as_ref().and_then(|p| p.overflow_at).map(|k| k.to_string()).unwrap_or_default(),
        "cost_analytic" => num(out.cost_analytic),
        "cost_mc" => num(out.cost_mc.map(|e| e.mean)),
        "cost_mc_se" => num(out.cost_mc.map(|e| e.std_error)),
        "mc_n" => out.cost_mc.map(|e| e.n.to_string()).unwrap_or_default(),
        "z" => match (out.cost_analytic, out.cost_mc) {
            (Some(a), Some(e)) => e.z_score(a).to_string(),
            _ => String::new(),
        },
        "expected_cycles" => num(out.expected_cycles),
        "prob_on" => num(out.prob_on),
        "mean_cycle_length" => num(out.mean_cycle_length),
        "series_terms" => out.series.map(|s| s.terms.to_string()).unwrap_or_default(),
        "series_last_term" => num(out.series.map(|s| s.last_term)),
        "clamped_by" => num(out.series.map(|s| s.clamped_by)),
        "lc_L" => num(lc_len),
        "lc_analytic" => num(out.life_cycle_analytic.map(|l| l.expected_cost)),
        "lc_mc" => num(out.life_cycle_mc.map(|e| e.mean)),
        "lc_mc_se" => num(out.life_cycle_mc.map(|e| e.std_error)),
        "lc_mc_mean_L" => num(out.life_length_mc.map(|e| e.mean)),
        "lc_analytic_at_mc_L" => num(out.life_cycle_at_mc_length),
        "seed" => c.sim.seed.to_string(),
        "config" => point.document.to_string(),
        other => unreachable!("unknown column {other}"),
    }
}

/// One header row (sweep paths first, then the policy's fixed columns) and
/// one row per point. Every row carries its resolved config as JSON.
pub fn write_csv<W: Write>(out: W, rows: &[(SweepPoint, Outcome)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let Some((first, _)) = rows.first() else {
        return Ok(());
    };
    let axes: Vec<&str> = first.assignments.iter().map(|(p, _)| p.as_str()).collect();
    let cols = columns(&first.config.policy);
    let mut header: Vec<&str> = axes.clone();
    header.extend_from_slice(cols);
    w.write_record(&header)?;
    for (point, outcome) in rows {
        if point.config.policy.kind_name() != first.config.policy.kind_name() {
            return Err(CliError::Config("a sweep cannot change policy.kind".into()));
        }
        let mut record: Vec<String> = point.assignments.iter().map(|(_, v)| v.to_string()).collect();
        record.extend(cols.iter().map(|c| field(c, point, outcome)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable summary of one evaluated point.
pub fn render_report(point: &SweepPoint, out: &Outcome) -> String {
    let c = &point.config;
    let mut s = String::new();
    if !point.assignments.is_empty() {
        let parts: Vec<String> = point.assignments.iter().map(|(p, v)| format!("{p}={v}")).collect();
        let _ = writeln!(s, "[{}]", parts.join(", "));
    }
    let _ = writeln!(s, "policy {} with T = {}", c.policy.kind_name(), c.policy.period());
    if let Some(v) = out.cost_analytic {
        let label = match c.policy {
            WarrantyPolicy::NonRenewing { .. } => "E(C(T))",
            _ => "E(C(W_T^n))",
        };
        let _ = writeln!(s, "  {label:<22} {v:.6}");
    }
    if let Some(v) = out.expected_cycles {
        let _ = writeln!(s, "  {:<22} {v:.6}", "m1(T)");
    }
    if let Some(v) = out.prob_on {
        let _ = writeln!(s, "  {:<22} {v:.6}", "P(on at T)");
    }
    if let Some(v) = out.mean_cycle_length {
        let _ = writeln!(s, "  {:<22} {v:.4}", "mean cycle length");
    }
    if let Some(d) = out.series {
        let _ = writeln!(
            s,
            "  series: up to {} terms, last term {:.2e}, clamped by {:.2e}",
            d.terms, d.last_term, d.clamped_by
        );
    }
    if let Some(p) = &out.partial_sums {
        let _ = writeln!(
            s,
            "  expected cost diverges; partial sum after {} terms = {:.6e}",
            p.sums.len(),
            p.sums.last().copied().unwrap_or(0.0)
        );
        match p.divergence_from {
            Some(k) => {
                let _ = writeln!(s, "  term ratio > 1 for every k >= {k}");
            }
            None => {
                let _ = writeln!(s, "  term ratios do not stay above 1 (series may converge)");
            }
        }
        if let Some(k) = p.overflow_at {
            let _ = writeln!(s, "  partial sums overflow at k = {k}");
        }
    }
    if let Some(d) = &out.repair_distribution {
        for a in &d.atoms {
            let _ = writeln!(s, "  P({} repairs) = {:.6e}  cost {:.4}", a.repairs, a.probability, a.cost);
        }
    }
    if let Some(l) = out.life_cycle_analytic {
        let _ = writeln!(
            s,
            "  life cycle to L = {}: {:.6} ({:.4} repurchases)",
            l.length, l.expected_cost, l.repurchases
        );
    }
    if let Some(e) = out.cost_mc {
        let _ = write!(s, "  simulated cost {:.6} ± {:.6} (n = {}, seed {})", e.mean, e.std_error, e.n, c.sim.seed);
        if let Some(a) = out.cost_analytic {
            let _ = write!(s, ", |Δ|/SE = {:.2}", e.z_score(a));
        }
        s.push('\n');
    }
    if let (Some(e), Some(l)) = (out.life_cycle_mc, out.life_length_mc) {
        let _ = writeln!(s, "  simulated life cycle {:.6} ± {:.6}, mean L = {:.2}", e.mean, e.std_error, l.mean);
    }
    if let Some(v) = out.life_cycle_at_mc_length {
        let _ = writeln!(s, "  analytic life cycle at simulated mean L: {v:.6}");
    }
    s
}
