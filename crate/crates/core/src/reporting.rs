//! Delay comparison, accumulated conflict curves, per-layer utilization
//! and departure-density sweeps, with their CSV/JSON writers.

use crate::batch::{
    generate_scenario, plan_baseline, plan_fcfs, BatchError, BatchOutcome, Environment, FlightPlan,
    ScenarioConfig,
};
use crate::grid::GridSpec;
use crate::occupancy::{conflict_event_count, duplicate_occupancy_time, DuplicateCounter};
use crate::search::Trajectory4D;
use serde::Serialize;
use std::collections::HashMap;
use std::io::Write;
use thiserror::Error;

/// Delays smaller than this are float noise between equal-cost paths.
pub const DELAY_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("flight ids differ between the two plan sets (first mismatch: {0})")]
    IdMismatch(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlightDelay {
    pub id: u64,
    pub baseline_s: f64,
    pub cfa_s: f64,
    pub delay_s: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayReport {
    /// In the order of the conflict-free plan list.
    pub flights: Vec<FlightDelay>,
    /// Running sum of `delay_s`.
    pub accumulated: Vec<f64>,
    pub total_delay: f64,
    pub max_flight_time: f64,
}

/// Per-flight delay of `cfa` against `baseline`, both holding the same ids.
///
/// Flight times run from the requested departure, so any ground hold
/// counts as delay.
pub fn delay_report(
    baseline: &[Trajectory4D],
    cfa: &[Trajectory4D],
) -> Result<DelayReport, ReportError> {
    let by_id: HashMap<u64, &Trajectory4D> = baseline.iter().map(|t| (t.id, t)).collect();
    if by_id.len() != cfa.len() {
        let missing = baseline
            .iter()
            .find(|b| !cfa.iter().any(|c| c.id == b.id))
            .or_else(|| cfa.iter().find(|c| !by_id.contains_key(&c.id)))
            .map_or(0, |t| t.id);
        return Err(ReportError::IdMismatch(missing));
    }
    let mut flights = Vec::with_capacity(cfa.len());
    let mut accumulated = Vec::with_capacity(cfa.len());
    let (mut total, mut max_time) = (0.0, 0.0f64);
    for c in cfa {
        let b = by_id.get(&c.id).ok_or(ReportError::IdMismatch(c.id))?;
        let baseline_s = b.flight_time;
        let cfa_s = c.arrival() - b.t_dep;
        let mut delay_s = cfa_s - baseline_s;
        if delay_s.abs() < DELAY_EPSILON {
            delay_s = 0.0;
        }
        let ratio = if baseline_s > 0.0 {
            delay_s / baseline_s
        } else {
            0.0
        };
        total += delay_s;
        max_time = max_time.max(cfa_s);
        accumulated.push(total);
        flights.push(FlightDelay {
            id: c.id,
            baseline_s,
            cfa_s,
            delay_s,
            ratio,
        });
    }
    Ok(DelayReport {
        flights,
        accumulated,
        total_delay: total,
        max_flight_time: max_time,
    })
}

/// `curve[n - 1]` is the duplicate-occupancy time of the first `n` trajectories.
pub fn conflict_curve(trajectories: &[Trajectory4D], dt: f64) -> Vec<f64> {
    let mut counter = DuplicateCounter::new(dt);
    trajectories
        .iter()
        .map(|t| {
            counter.add(t);
            counter.total()
        })
        .collect()
}

/// Occupied seconds per block, `layers[k][i][j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerHeatmap {
    pub layers: Vec<Vec<Vec<f64>>>,
}

impl LayerHeatmap {
    pub fn layer_total(&self, k: usize) -> f64 {
        self.layers[k].iter().flatten().sum()
    }

    pub fn total(&self) -> f64 {
        (0..self.layers.len()).map(|k| self.layer_total(k)).sum()
    }

    /// Fraction of all occupied seconds spent on layer `k`.
    pub fn layer_share(&self, k: usize) -> f64 {
        let total = self.total();
        if total > 0.0 {
            self.layer_total(k) / total
        } else {
            0.0
        }
    }
}

pub fn heatmap(trajectories: &[Trajectory4D], grid: &GridSpec) -> LayerHeatmap {
    let (ni, nj, nk) = grid.dims();
    let mut layers = vec![vec![vec![0.0; nj as usize]; ni as usize]; nk as usize];
    for v in trajectories.iter().flat_map(|t| &t.visits) {
        layers[v.block.k as usize][v.block.i as usize][v.block.j as usize] += v.duration();
    }
    LayerHeatmap { layers }
}

/// Both planners run over the same plans.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub baseline: BatchOutcome,
    pub cfa: BatchOutcome,
    /// Over flights both planners routed.
    pub delays: DelayReport,
    /// Accumulated duplicate-occupancy block-seconds of the baseline.
    pub baseline_curve: Vec<f64>,
    pub cfa_curve: Vec<f64>,
    pub baseline_conflict_events: usize,
}

pub fn compare(plans: &[FlightPlan], env: &Environment, dt: f64, jobs: usize) -> Comparison {
    let baseline = plan_baseline(plans, env, jobs);
    let cfa = plan_fcfs(plans, env);
    let ok_cfa: std::collections::HashSet<u64> = cfa.trajectories.iter().map(|t| t.id).collect();
    let ok_base: std::collections::HashSet<u64> =
        baseline.trajectories.iter().map(|t| t.id).collect();
    let base_common: Vec<_> = baseline
        .trajectories
        .iter()
        .filter(|t| ok_cfa.contains(&t.id))
        .cloned()
        .collect();
    let cfa_common: Vec<_> = cfa
        .trajectories
        .iter()
        .filter(|t| ok_base.contains(&t.id))
        .cloned()
        .collect();
    let delays = delay_report(&base_common, &cfa_common).expect("common id sets match");
    Comparison {
        baseline_curve: conflict_curve(&baseline.trajectories, dt),
        cfa_curve: conflict_curve(&cfa.trajectories, dt),
        baseline_conflict_events: conflict_event_count(&baseline.trajectories),
        baseline,
        cfa,
        delays,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub window_s: f64,
    pub flights_per_min: f64,
    /// Baseline duplicate-occupancy block-seconds.
    pub conflicts: f64,
    pub total_delay_s: f64,
}

/// One full baseline and conflict-free run per departure window, with the
/// seed, flight count and environment of `base`.
pub fn density_sweep(
    windows: &[f64],
    base: &ScenarioConfig,
    env: &Environment,
    jobs: usize,
) -> Result<Vec<SweepRow>, BatchError> {
    if windows.is_empty() {
        return Err(BatchError::InvalidConfig(
            "sweep needs at least one window".into(),
        ));
    }
    windows
        .iter()
        .map(|&window| {
            let cfg = ScenarioConfig {
                window,
                ..base.clone()
            };
            let plans = generate_scenario(&cfg, env)?;
            let cmp = compare(&plans, env, cfg.dt, jobs);
            Ok(SweepRow {
                window_s: window,
                flights_per_min: cfg.count as f64 * 60.0 / window,
                conflicts: duplicate_occupancy_time(&cmp.baseline.trajectories, cfg.dt),
                total_delay_s: cmp.delays.total_delay,
            })
        })
        .collect()
}

pub fn write_delays_csv(w: impl Write, report: &DelayReport) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "baseline_s", "cfa_s", "delay_s", "ratio"])?;
    for f in &report.flights {
        out.serialize((f.id, f.baseline_s, f.cfa_s, f.delay_s, f.ratio))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_conflict_curve_csv(w: impl Write, curve: &[f64]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "cumulative_block_seconds"])?;
    for (n, v) in curve.iter().enumerate() {
        out.serialize((n + 1, v))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv(w: impl Write, rows: &[SweepRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["window_s", "flights_per_min", "conflicts", "total_delay_s"])?;
    for r in rows {
        out.serialize((r.window_s, r.flights_per_min, r.conflicts, r.total_delay_s))?;
    }
    out.flush()?;
    Ok(())
}

/// One layer as a JSON nested array, rows indexed by `i`.
pub fn heatmap_layer_json(map: &LayerHeatmap, k: usize) -> String {
    serde_json::to_string(&map.layers[k]).expect("heatmap serializes")
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut s = 0;
        while s < idx.len() {
            let mut e = s;
            while e + 1 < idx.len() && v[idx[e + 1]] == v[idx[s]] {
                e += 1;
            }
            let avg = (s + e) as f64 / 2.0 + 1.0;
            for &i in &idx[s..=e] {
                r[i] = avg;
            }
            s = e + 1;
        }
        r
    }
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
