//! Discrete-event simulation of the on/off process and the warranty policies.
//!
//! Every replication owns a ChaCha stream keyed by `(seed, replication)`.
//! Within a replication, purchase `p` draws its on-times from stream `2p`
//! and its off-times from stream `2p + 1`, so the two sequences are
//! independent and the `i`-th on-time of an item does not depend on how many
//! off-times were drawn before it. Results are therefore identical for any
//! evaluation order or thread count.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric_process::{AgpModel, GeometricProcess};
use crate::warranty::{CostParams, WarrantyPolicy};

/// Repairs allowed in a single uncapped RFRW run before giving up.
pub const RFRW_REPAIR_CAP: u64 = 1_000_000;
/// Purchases allowed in one simulated life cycle.
pub const PURCHASE_CAP: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Replication {
    pub seed: u64,
    pub index: u64,
}

impl Replication {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Independent generator for one draw kind within this replication.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        rng
    }

    /// Lazily sampled lifetimes of the `purchase`-th item (0-based).
    pub fn item<'m>(&self, model: &'m AgpModel, purchase: u64) -> ItemPath<'m> {
        ItemPath {
            on: Lazy::new(model.on(), self.rng(2 * purchase)),
            off: Lazy::new(model.off(), self.rng(2 * purchase + 1)),
        }
    }
}

struct Lazy<'m> {
    process: &'m GeometricProcess,
    rng: ChaCha8Rng,
    drawn: Vec<f64>,
}

impl<'m> Lazy<'m> {
    fn new(process: &'m GeometricProcess, rng: ChaCha8Rng) -> Self {
        Self {
            process,
            rng,
            drawn: Vec::new(),
        }
    }

    fn get(&mut self, i: usize) -> f64 {
        while self.drawn.len() < i {
            let u: f64 = self.rng.sample(Open01);
            let next = self.drawn.len() + 1;
            let x = self.process.sample(next, u).expect("u lies in (0, 1)");
            self.drawn.push(x);
        }
        self.drawn[i - 1]
    }
}

/// On- and off-times of one item, drawn on first access and then fixed.
pub struct ItemPath<'m> {
    on: Lazy<'m>,
    off: Lazy<'m>,
}

impl ItemPath<'_> {
    /// `X_i`, 1-based.
    pub fn on_time(&mut self, i: usize) -> f64 {
        self.on.get(i)
    }

    /// `Y_i`, 1-based.
    pub fn off_time(&mut self, i: usize) -> f64 {
        self.off.get(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub phase: Phase,
    /// Cycle number, 1-based.
    pub index: usize,
    pub start: f64,
    pub duration: f64,
}

impl Event {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Alternating on/off periods; the last event ends after `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub events: Vec<Event>,
    pub horizon: f64,
}

impl Trajectory {
    /// The event in progress at `t` (periods are closed on the right).
    pub fn event_at(&self, t: f64) -> Option<&Event> {
        if t > self.horizon {
            return None;
        }
        self.events.iter().find(|e| e.end() >= t)
    }

    /// Number of completed cycles (repairs finished) by `t ≤ horizon`.
    pub fn cycles_completed(&self, t: f64) -> usize {
        self.events.iter().filter(|e| e.phase == Phase::Off && e.end() <= t).count()
    }
}

/// Samples `X_1, Y_1, X_2, ...` until the elapsed time exceeds `horizon`.
pub fn simulate_trajectory(horizon: f64, path: &mut ItemPath<'_>) -> Result<Trajectory> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be finite and > 0 (got {horizon})")));
    }
    let mut events = Vec::new();
    let mut t = 0.0;
    let mut i = 1;
    while t <= horizon {
        let x = path.on_time(i);
        events.push(Event {
            phase: Phase::On,
            index: i,
            start: t,
            duration: x,
        });
        t += x;
        if t > horizon {
            break;
        }
        let y = path.off_time(i);
        events.push(Event {
            phase: Phase::Off,
            index: i,
            start: t,
            duration: y,
        });
        t += y;
        i += 1;
    }
    Ok(Trajectory { events, horizon })
}

/// Warrantor's NRFRW cost on a trajectory: every repair that starts by `T`.
pub fn nrfrw_cost(trajectory: &Trajectory, cost: &CostParams, period: f64) -> Result<f64> {
    if trajectory.horizon < period {
        return Err(Error::Domain(format!(
            "trajectory horizon {} is shorter than T = {period}; extend it",
            trajectory.horizon
        )));
    }
    Ok(trajectory
        .events
        .iter()
        .filter(|e| e.phase == Phase::Off && e.start <= period)
        .map(|e| cost.repair_cost(e.duration))
        .sum())
}

/// What one item looks like at the end of a non-renewing warranty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NrfrwObservation {
    pub on_at_end: bool,
    /// `N(T)`, cycles completed by `T`.
    pub cycles: usize,
    /// Covered cost `C(T)`.
    pub cost: f64,
    /// `Σ_{i=1}^{N(T)+1} C_i`, charging the cycle in progress at `T` too.
    pub cost_through_next: f64,
    /// `Y_{N(T)+1}`.
    pub next_repair: f64,
    /// First failure after `T`.
    pub next_failure: f64,
}

pub fn observe_nrfrw(cost: &CostParams, period: f64, path: &mut ItemPath<'_>) -> NrfrwObservation {
    let mut t = 0.0;
    let mut covered = 0.0;
    let mut i = 1;
    loop {
        let x = path.on_time(i);
        if t + x > period {
            let y = path.off_time(i);
            return NrfrwObservation {
                on_at_end: true,
                cycles: i - 1,
                cost: covered,
                cost_through_next: covered + cost.repair_cost(y),
                next_repair: y,
                next_failure: t + x,
            };
        }
        t += x;
        let y = path.off_time(i);
        covered += cost.repair_cost(y);
        if t + y > period {
            return NrfrwObservation {
                on_at_end: false,
                cycles: i - 1,
                cost: covered,
                cost_through_next: covered,
                next_repair: y,
                next_failure: t + y + path.on_time(i + 1),
            };
        }
        t += y;
        i += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenewingOutcome {
    pub cost: f64,
    pub repairs: u64,
    /// End of warranty coverage.
    pub coverage_end: f64,
    /// First failure not covered by the warranty.
    pub uncovered_failure: f64,
}

/// Renewing warranty: each covered repair restarts a period of length `T`.
/// With `max_repairs`, the warranty ends at the completion of that repair and
/// the next failure is the customer's.
pub fn rfrw_outcome(cost: &CostParams, period: f64, max_repairs: Option<u64>, path: &mut ItemPath<'_>) -> Result<RenewingOutcome> {
    let mut t = 0.0;
    let mut total = 0.0;
    let mut k: u64 = 0;
    loop {
        let x = path.on_time(k as usize + 1);
        if max_repairs == Some(k) {
            return Ok(RenewingOutcome {
                cost: total,
                repairs: k,
                coverage_end: t,
                uncovered_failure: t + x,
            });
        }
        if x > period {
            return Ok(RenewingOutcome {
                cost: total,
                repairs: k,
                coverage_end: t + period,
                uncovered_failure: t + x,
            });
        }
        if max_repairs.is_none() && k >= RFRW_REPAIR_CAP {
            return Err(Error::SimulationCap {
                what: "renewing-warranty repairs",
                cap: RFRW_REPAIR_CAP,
            });
        }
        k += 1;
        let y = path.off_time(k as usize);
        total += cost.repair_cost(y);
        t += x + y;
    }
}

/// Cost and uncovered failure of one purchase under `policy`.
pub fn purchase_outcome(cost: &CostParams, policy: &WarrantyPolicy, path: &mut ItemPath<'_>) -> Result<(f64, f64)> {
    match *policy {
        WarrantyPolicy::NonRenewing { period } => {
            let obs = observe_nrfrw(cost, period, path);
            Ok((obs.cost, obs.next_failure))
        }
        WarrantyPolicy::Renewing { period } => {
            let o = rfrw_outcome(cost, period, None, path)?;
            Ok((o.cost, o.uncovered_failure))
        }
        WarrantyPolicy::RestrictedRenewing { period, max_repairs } => {
            let o = rfrw_outcome(cost, period, Some(max_repairs as u64), path)?;
            Ok((o.cost, o.uncovered_failure))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifeCycleOutcome {
    pub cost: f64,
    /// Time of the first uncovered failure at or after `L*`.
    pub length: f64,
    pub purchases: u64,
}

/// Repurchases at every uncovered failure until the first one at or after
/// `min_length`.
pub fn life_cycle_cost(
    model: &AgpModel,
    cost: &CostParams,
    policy: &WarrantyPolicy,
    min_length: f64,
    rep: &Replication,
) -> Result<LifeCycleOutcome> {
    if !(min_length.is_finite() && min_length > 0.0) {
        return Err(Error::invalid("life_cycle.L_star", format!("must be finite and > 0 (got {min_length})")));
    }
    let mut start = 0.0;
    let mut total = 0.0;
    for purchase in 0..PURCHASE_CAP {
        let mut path = rep.item(model, purchase);
        let (c, failure) = purchase_outcome(cost, policy, &mut path)?;
        total += c;
        let at = start + failure;
        if at >= min_length {
            return Ok(LifeCycleOutcome {
                cost: total,
                length: at,
                purchases: purchase + 1,
            });
        }
        start = at;
    }
    Err(Error::SimulationCap {
        what: "purchases in one life cycle",
        cap: PURCHASE_CAP,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    /// Trajectory horizon for time-window quantities.
    pub horizon: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::invalid("sim.replications", "must be >= 2"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("sim.horizon", format!("must be finite and > 0 (got {})", self.horizon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            n: n as u64,
        }
    }

    /// `|value - mean|` in standard errors (infinite if the SE is zero and
    /// the values differ).
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Runs `runner` for replications `0..replications` in parallel and returns
/// the outputs in replication order. The first failure (lowest index) is
/// reported with its replication number.
pub fn replicate<T, F>(replications: u64, seed: u64, runner: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Replication) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..replications)
        .into_par_iter()
        .map(|i| runner(&Replication::new(seed, i)))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Replication {
                replication: i as u64,
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn estimate<F>(config: &SimConfig, runner: F) -> Result<Estimate>
where
    F: Fn(&Replication) -> Result<f64> + Sync,
{
    config.validate()?;
    let xs = replicate(config.replications, config.seed, runner)?;
    Ok(Estimate::from_samples(&xs))
}

/// Several quantities per replication, each estimated from the same runs.
pub fn estimate_vec<F, const K: usize>(config: &SimConfig, runner: F) -> Result<[Estimate; K]>
where
    F: Fn(&Replication) -> Result<[f64; K]> + Sync,
{
    config.validate()?;
    let rows = replicate(config.replications, config.seed, runner)?;
    Ok(std::array::from_fn(|k| {
        let column: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        Estimate::from_samples(&column)
    }))
}

/// Largest gap between the empirical CDF of `samples` and `cdf`.
pub fn kolmogorov_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_model() -> AgpModel {
        AgpModel::exponential(0.0055, 1.1, 0.01, 0.95).unwrap()
    }

    fn unit_cost() -> CostParams {
        CostParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn trajectories_are_reproducible_and_well_formed() {
        let model = reference_model();
        let rep = Replication::new(42, 7);
        let a = simulate_trajectory(1460.0, &mut rep.item(&model, 0)).unwrap();
        let b = simulate_trajectory(1460.0, &mut rep.item(&model, 0)).unwrap();
        assert_eq!(a, b);
        let mut t = 0.0;
        for (k, e) in a.events.iter().enumerate() {
            assert_eq!(e.phase, if k % 2 == 0 { Phase::On } else { Phase::Off });
            assert_eq!(e.index, k / 2 + 1);
            assert_eq!(e.start, t);
            assert!(e.duration > 0.0);
            t += e.duration;
        }
        assert!(t > 1460.0);
        assert!(a.events[..a.events.len() - 1].iter().all(|e| e.end() <= 1460.0));
        let other = simulate_trajectory(1460.0, &mut Replication::new(42, 8).item(&model, 0)).unwrap();
        assert_ne!(a, other);
        assert!(simulate_trajectory(0.0, &mut rep.item(&model, 0)).is_err());
    }

    #[test]
    fn on_and_off_streams_are_independent_of_access_order() {
        let model = reference_model();
        let rep = Replication::new(1, 2);
        let mut p = rep.item(&model, 3);
        let x3 = p.on_time(3);
        let mut q = rep.item(&model, 3);
        let _ = q.off_time(5);
        assert_eq!(q.on_time(3), x3);
        assert_ne!(rep.item(&model, 4).on_time(1), rep.item(&model, 3).on_time(1));
    }

    #[test]
    fn nrfrw_cost_examples() {
        let cost = CostParams::new(2.0, 0.5).unwrap();
        let long_first = Trajectory {
            events: vec![Event { phase: Phase::On, index: 1, start: 0.0, duration: 20.0 }],
            horizon: 10.0,
        };
        assert_eq!(nrfrw_cost(&long_first, &cost, 10.0).unwrap(), 0.0);
        let off_at_end = Trajectory {
            events: vec![
                Event { phase: Phase::On, index: 1, start: 0.0, duration: 4.0 },
                Event { phase: Phase::Off, index: 1, start: 4.0, duration: 8.0 },
            ],
            horizon: 10.0,
        };
        assert_eq!(nrfrw_cost(&off_at_end, &cost, 10.0).unwrap(), 2.0 + 0.5 * 8.0);
        assert!(nrfrw_cost(&off_at_end, &cost, 11.0).is_err());
        assert_eq!(off_at_end.event_at(10.0).unwrap().phase, Phase::Off);
        assert_eq!(off_at_end.cycles_completed(10.0), 0);
    }

    #[test]
    fn observation_agrees_with_trajectory() {
        let model = reference_model();
        for i in 0..300 {
            let rep = Replication::new(9, i);
            let traj = simulate_trajectory(1460.0, &mut rep.item(&model, 0)).unwrap();
            let obs = observe_nrfrw(&unit_cost(), 1460.0, &mut rep.item(&model, 0));
            assert_eq!(obs.cost, nrfrw_cost(&traj, &unit_cost(), 1460.0).unwrap());
            assert_eq!(obs.cycles, traj.cycles_completed(1460.0));
            assert_eq!(obs.on_at_end, traj.event_at(1460.0).unwrap().phase == Phase::On);
            assert!(obs.next_failure > 1460.0);
        }
    }

    #[test]
    fn renewing_outcome_examples() {
        let model = reference_model();
        let rep = (0..1000)
            .map(|i| Replication::new(5, i))
            .find(|r| r.item(&model, 0).on_time(1) > 100.0)
            .unwrap();
        let mut path = rep.item(&model, 0);
        let x1 = path.on_time(1);
        let o = rfrw_outcome(&unit_cost(), 100.0, None, &mut path).unwrap();
        assert_eq!((o.cost, o.repairs, o.coverage_end, o.uncovered_failure), (0.0, 0, 100.0, x1));

        // every on-time is below T = 10^4 for a while
        let mut path = rep.item(&model, 0);
        let o = rfrw_outcome(&unit_cost(), 1e4, Some(3), &mut path).unwrap();
        let z: f64 = (1..=3).map(|i| path.on_time(i) + path.off_time(i)).sum();
        assert_eq!(o.repairs, 3);
        assert!((o.coverage_end - z).abs() < 1e-9);
        assert!((o.uncovered_failure - z - path.on_time(4)).abs() < 1e-9);
    }

    #[test]
    fn uncapped_renewing_run_hits_safety_cap() {
        // on-times shrink, so a long warranty never lapses
        let model = AgpModel::exponential(0.0055, 1.5, 0.01, 0.95).unwrap();
        let err = rfrw_outcome(&unit_cost(), 1e6, None, &mut Replication::new(0, 0).item(&model, 0)).unwrap_err();
        assert!(matches!(err, Error::SimulationCap { cap: RFRW_REPAIR_CAP, .. }));
    }

    #[test]
    fn life_cycle_single_purchase() {
        let model = reference_model();
        let policy = WarrantyPolicy::NonRenewing { period: 1460.0 };
        let out = life_cycle_cost(&model, &unit_cost(), &policy, 1.0, &Replication::new(3, 3)).unwrap();
        assert_eq!(out.purchases, 1);
        assert!(out.length > 1460.0);
        let out = life_cycle_cost(&model, &unit_cost(), &policy, 20_000.0, &Replication::new(3, 3)).unwrap();
        assert!(out.purchases > 1 && out.length >= 20_000.0);
    }

    #[test]
    fn estimator_basics() {
        let config = SimConfig { replications: 1000, seed: 1, horizon: 1.0 };
        let e = estimate(&config, |_| Ok(3.0)).unwrap();
        assert_eq!((e.mean, e.std_error, e.n), (3.0, 0.0, 1000));
        assert_eq!(e.z_score(3.0), 0.0);
        let bad = SimConfig { replications: 1, ..config };
        assert!(estimate(&bad, |_| Ok(1.0)).is_err());
        let err = estimate(&config, |r| if r.index == 17 { Err(Error::Domain("x".into())) } else { Ok(1.0) }).unwrap_err();
        assert!(matches!(err, Error::Replication { replication: 17, .. }));
        assert_eq!(err.root(), &Error::Domain("x".into()));
    }

    #[test]
    fn estimates_do_not_depend_on_thread_count() {
        let model = reference_model();
        let config = SimConfig { replications: 4000, seed: 11, horizon: 1460.0 };
        let run = || {
            estimate_vec(&config, |r| {
                let o = observe_nrfrw(&unit_cost(), 1460.0, &mut r.item(&model, 0));
                Ok([o.cost, o.cycles as f64])
            })
            .unwrap()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(format!("{one:?}"), format!("{four:?}"));
    }

    #[test]
    fn on_time_means_match_process() {
        let model = reference_model();
        let rows = replicate(100_000, 21, |r| {
            let mut p = r.item(&model, 0);
            Ok([1, 2, 3, 4, 5].map(|i| p.on_time(i)))
        })
        .unwrap();
        for i in 0..5 {
            let xs: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let e = Estimate::from_samples(&xs);
            assert!(e.z_score(model.on().mean(i + 1).unwrap()) < 3.0, "i={}", i + 1);
        }
    }

    #[test]
    fn kolmogorov_distance_of_exact_sample() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = kolmogorov_distance(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
    }
}
