//! Trip-percentage tables, voltage-unbalance reports and voltage profiles.

use serde::Serialize;
use thiserror::Error;

use crate::devices::TripCategory;
use crate::engine::SimulationResult;
use crate::netmodel::{to_sequence, Phase, PhasorTriple, Zone};

/// Largest acceptable voltage unbalance factor.
pub const VUF_LIMIT: f64 = 0.03;
/// Below this positive-sequence magnitude (pu) VUF is undefined.
pub const VUF_MIN_POSITIVE_PU: f64 = 1e-9;

/// Negative- over positive-sequence magnitude; `None` when the positive
/// sequence has collapsed.
pub fn vuf(v: &PhasorTriple) -> Option<f64> {
    let s = to_sequence(v);
    let v1 = s.positive.norm();
    (v1 >= VUF_MIN_POSITIVE_PU).then(|| s.negative.norm() / v1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripRow {
    pub scenario: String,
    pub fault_kind: String,
    pub fault_bus: String,
    pub plr: f64,
    pub vr: bool,
    pub category: TripCategory,
    pub n_total: usize,
    pub n_tripped: usize,
    /// Percentage, rounded to one decimal.
    pub pct: f64,
}

pub fn percent(n_tripped: usize, n_total: usize) -> f64 {
    if n_total == 0 {
        return 0.0;
    }
    (1000.0 * n_tripped as f64 / n_total as f64).round() / 10.0
}

/// One row per category for each result, counting units.
pub fn trip_table<'a>(results: impl IntoIterator<Item = &'a SimulationResult>) -> Vec<TripRow> {
    let mut rows = Vec::new();
    for r in results {
        let mut total = [0usize; 4];
        let mut tripped = [0usize; 4];
        for u in &r.network.ibrs {
            let k = category_slot(u.category());
            total[k] += 1;
            if r.tripped(&u.id) {
                tripped[k] += 1;
            }
        }
        for cat in TripCategory::ALL {
            let k = category_slot(cat);
            rows.push(TripRow {
                scenario: r.label.clone(),
                fault_kind: r.fault.kind.to_string(),
                fault_bus: r.fault.bus.clone(),
                plr: r.plr,
                vr: r.voltage_regulation,
                category: cat,
                n_total: total[k],
                n_tripped: tripped[k],
                pct: percent(tripped[k], total[k]),
            });
        }
    }
    rows
}

fn category_slot(c: TripCategory) -> usize {
    TripCategory::ALL.iter().position(|x| *x == c).expect("listed category")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeVuf {
    pub node: String,
    /// `None` when VUF was undefined at every sample of the window.
    pub max_vuf: Option<f64>,
    pub exceeds_limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VufReport {
    pub scenario: String,
    pub window_s: (f64, f64),
    pub nodes: Vec<NodeVuf>,
    pub global_max: Option<f64>,
}

impl VufReport {
    pub fn exceeds_limit(&self) -> bool {
        self.global_max.is_some_and(|v| v > VUF_LIMIT)
    }
}

/// Post-clearing window: the first sample after fault clearing to the end
/// of the run. The sample at the clearing instant still holds the faulted
/// step.
pub fn default_vuf_window(r: &SimulationResult) -> (f64, f64) {
    let end = *r.times.last().unwrap_or(&r.t_clear_s);
    let eps = 1e-9;
    let start = r.times.iter().copied().find(|&t| t > r.t_clear_s + eps).unwrap_or(end);
    (start, end)
}

/// Per-node maximum VUF over the samples inside `window` (inclusive) on
/// three-phase distribution nodes, plus transmission buses when asked.
pub fn max_vuf_over_window(r: &SimulationResult, window: (f64, f64), include_transmission: bool) -> VufReport {
    let eps = 1e-9;
    let samples: Vec<usize> = (0..r.times.len())
        .filter(|&k| r.times[k] >= window.0 - eps && r.times[k] <= window.1 + eps)
        .collect();
    let mut nodes = Vec::new();
    for (bi, bus) in r.network.buses.iter().enumerate() {
        if bus.zone == Zone::Transmission && !include_transmission {
            continue;
        }
        let [Some(ra), Some(rb), Some(rc)] = r.index.bus_rows(bi) else {
            continue;
        };
        let max_vuf = samples
            .iter()
            .filter_map(|&k| {
                let v = &r.voltages[k];
                vuf(&PhasorTriple::new(v[ra], v[rb], v[rc]))
            })
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
        nodes.push(NodeVuf {
            node: bus.id.clone(),
            max_vuf,
            exceeds_limit: max_vuf.is_some_and(|v| v > VUF_LIMIT),
        });
    }
    let global_max = nodes
        .iter()
        .filter_map(|n| n.max_vuf)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    VufReport {
        scenario: r.label.clone(),
        window_s: window,
        nodes,
        global_max,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub node: String,
    pub phase: Phase,
    pub v_pu: f64,
    pub angle_deg: f64,
    pub distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoltageProfile {
    pub scenario: String,
    pub time_s: f64,
    /// Ordered by distance from the feeder head, then node order, then phase.
    pub points: Vec<ProfilePoint>,
}

impl VoltageProfile {
    pub fn get(&self, node: &str, phase: Phase) -> Option<&ProfilePoint> {
        self.points.iter().find(|p| p.node == node && p.phase == phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("t = {0} s is not a sample time of the run")]
pub struct TimeNotOnGrid(pub f64);

/// Snapshot of the feeder nodes reachable from the feeder head.
pub fn profile(r: &SimulationResult, t: f64) -> Result<VoltageProfile, TimeNotOnGrid> {
    let k = r.sample_at(t);
    let tol = 1e-6 * (r.times.get(1).map_or(1.0, |t1| t1 - r.times[0])).max(1e-9);
    if r.times.is_empty() || (r.times[k] - t).abs() > tol.max(1e-9) {
        return Err(TimeNotOnGrid(t));
    }
    Ok(profile_at_sample(r, k))
}

/// Snapshot at sample `k`.
pub fn profile_at_sample(r: &SimulationResult, k: usize) -> VoltageProfile {
    let dist = r.network.distances_from_head();
    let mut order: Vec<usize> = (0..r.network.buses.len())
        .filter(|&bi| dist[bi].is_some() && r.network.buses[bi].zone == Zone::Distribution)
        .collect();
    order.sort_by(|&a, &b| dist[a].unwrap().total_cmp(&dist[b].unwrap()).then(a.cmp(&b)));
    let v = &r.voltages[k];
    let mut points = Vec::new();
    for bi in order {
        for (p, row) in Phase::ALL.iter().zip(r.index.bus_rows(bi)) {
            if let Some(row) = row {
                points.push(ProfilePoint {
                    node: r.network.buses[bi].id.clone(),
                    phase: *p,
                    v_pu: v[row].norm(),
                    angle_deg: v[row].arg().to_degrees(),
                    distance_km: dist[bi].unwrap(),
                });
            }
        }
    }
    VoltageProfile {
        scenario: r.label.clone(),
        time_s: r.times[k],
        points,
    }
}

/// The far end of the main trunk: the three-phase distribution node
/// farthest from the feeder head.
pub fn feeder_end(r: &SimulationResult) -> Option<String> {
    r.network.main_trunk().last().map(|&bi| r.network.buses[bi].id.clone())
}
