use std::collections::{BTreeMap, HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::{Phase, PhaseSet};
use super::NetError;
use crate::devices::{FrtCurve, Ibr, Regulator, ShuntCapacitor, ZipLoad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Transmission,
    Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub base_kv_ll: f64,
    pub phases: PhaseSet,
    pub zone: Zone,
}

impl Bus {
    /// Impedance base in ohms for a three-phase power base in MVA.
    pub fn z_base_ohm(&self, s_base_mva: f64) -> f64 {
        self.base_kv_ll * self.base_kv_ll / s_base_mva
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineBranch {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length_km: f64,
    /// Positive-sequence (and negative-sequence) series impedance, Ω/km.
    pub z1_per_km: Complex64,
    /// Zero-sequence series impedance, Ω/km.
    pub z0_per_km: Complex64,
    pub phases: PhaseSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connection {
    /// Delta HV, grounded-wye LV, LV lagging HV by 30°.
    DeltaYgLag30,
    YgYg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerBranch {
    pub id: String,
    /// HV bus.
    pub from: String,
    /// LV bus.
    pub to: String,
    pub connection: Connection,
    pub s_rated_mva: f64,
    /// Leakage impedance, per-unit on the transformer's own rating.
    pub z_leak_pu: Complex64,
    /// LV neutral grounded. An ungrounded neutral floats unless
    /// `z_ground_pu` supplies a grounding impedance.
    pub grounded: bool,
    pub z_ground_pu: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceEquivalent {
    pub bus: String,
    pub v_set_pu: f64,
    pub angle_deg: f64,
    /// Per-unit on the system base.
    pub z_internal_pu: Complex64,
}

/// A named fault location, e.g. `PCC → "3"`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultLocation {
    pub name: String,
    pub bus: String,
}

/// The full phase-domain electrical description.
///
/// Constructed through [`NetworkModel::new`], which indexes buses and checks
/// structural invariants; the `ingest` module performs the complete
/// document-level validation with located diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub name: String,
    pub s_base_mva: f64,
    pub f_nominal_hz: f64,
    pub feeder_head: String,
    pub fault_locations: Vec<FaultLocation>,
    pub buses: Vec<Bus>,
    pub lines: Vec<LineBranch>,
    pub transformers: Vec<TransformerBranch>,
    pub sources: Vec<SourceEquivalent>,
    pub loads: Vec<ZipLoad>,
    pub capacitors: Vec<ShuntCapacitor>,
    pub regulators: Vec<Regulator>,
    pub ibrs: Vec<Ibr>,
    pub frt_curves: BTreeMap<String, FrtCurve>,
    bus_index: HashMap<String, usize>,
}

/// Everything needed to construct a [`NetworkModel`].
#[derive(Debug, Clone, Default)]
pub struct NetworkParts {
    pub name: String,
    pub s_base_mva: f64,
    pub f_nominal_hz: f64,
    pub feeder_head: String,
    pub fault_locations: Vec<FaultLocation>,
    pub buses: Vec<Bus>,
    pub lines: Vec<LineBranch>,
    pub transformers: Vec<TransformerBranch>,
    pub sources: Vec<SourceEquivalent>,
    pub loads: Vec<ZipLoad>,
    pub capacitors: Vec<ShuntCapacitor>,
    pub regulators: Vec<Regulator>,
    pub ibrs: Vec<Ibr>,
    pub frt_curves: BTreeMap<String, FrtCurve>,
}

impl NetworkModel {
    pub fn new(parts: NetworkParts) -> Result<Self, NetError> {
        let mut bus_index = HashMap::with_capacity(parts.buses.len());
        for (i, b) in parts.buses.iter().enumerate() {
            if bus_index.insert(b.id.clone(), i).is_some() {
                return Err(NetError::InvalidModel(format!("duplicate bus id {}", b.id)));
            }
        }
        let net = NetworkModel {
            name: parts.name,
            s_base_mva: parts.s_base_mva,
            f_nominal_hz: parts.f_nominal_hz,
            feeder_head: parts.feeder_head,
            fault_locations: parts.fault_locations,
            buses: parts.buses,
            lines: parts.lines,
            transformers: parts.transformers,
            sources: parts.sources,
            loads: parts.loads,
            capacitors: parts.capacitors,
            regulators: parts.regulators,
            ibrs: parts.ibrs,
            frt_curves: parts.frt_curves,
            bus_index,
        };
        net.check_structure()?;
        Ok(net)
    }

    pub fn into_parts(self) -> NetworkParts {
        NetworkParts {
            name: self.name,
            s_base_mva: self.s_base_mva,
            f_nominal_hz: self.f_nominal_hz,
            feeder_head: self.feeder_head,
            fault_locations: self.fault_locations,
            buses: self.buses,
            lines: self.lines,
            transformers: self.transformers,
            sources: self.sources,
            loads: self.loads,
            capacitors: self.capacitors,
            regulators: self.regulators,
            ibrs: self.ibrs,
            frt_curves: self.frt_curves,
        }
    }

    fn check_structure(&self) -> Result<(), NetError> {
        if self.buses.is_empty() {
            return Err(NetError::InvalidModel("network has no buses".into()));
        }
        if self.sources.len() != 1 {
            return Err(NetError::InvalidModel(format!(
                "expected exactly one source equivalent, found {}",
                self.sources.len()
            )));
        }
        if !(self.s_base_mva > 0.0) {
            return Err(NetError::InvalidModel("s_base_mva must be positive".into()));
        }
        let check = |bus: &str, phases: PhaseSet| -> Result<(), NetError> {
            let b = self.bus(bus).ok_or_else(|| NetError::UnknownBus(bus.to_string()))?;
            if !phases.is_subset_of(b.phases) {
                return Err(NetError::PhaseMismatch {
                    bus: bus.to_string(),
                    phases: phases.to_string(),
                });
            }
            Ok(())
        };
        for l in &self.lines {
            check(&l.from, l.phases)?;
            check(&l.to, l.phases)?;
        }
        for t in &self.transformers {
            check(&t.from, PhaseSet::ABC)?;
            check(&t.to, PhaseSet::ABC)?;
        }
        for s in &self.sources {
            check(&s.bus, PhaseSet::ABC)?;
        }
        for l in &self.loads {
            check(&l.bus, PhaseSet::single(l.phase))?;
        }
        for c in &self.capacitors {
            check(&c.bus, c.phases)?;
        }
        for r in &self.regulators {
            check(&r.from, r.phases)?;
            check(&r.to, r.phases)?;
            if self.line_between(&r.from, &r.to).is_none() {
                return Err(NetError::InvalidModel(format!(
                    "regulator {} has no line {} -> {}",
                    r.id, r.from, r.to
                )));
            }
        }
        for i in &self.ibrs {
            check(&i.bus, i.phases)?;
            if !self.frt_curves.contains_key(&i.frt_curve) {
                return Err(NetError::InvalidModel(format!(
                    "ibr {} references unknown FRT curve {}",
                    i.id, i.frt_curve
                )));
            }
        }
        if self.bus(&self.feeder_head).is_none() {
            return Err(NetError::UnknownBus(self.feeder_head.clone()));
        }
        for loc in &self.fault_locations {
            if self.bus(&loc.bus).is_none() {
                return Err(NetError::UnknownBus(loc.bus.clone()));
            }
        }
        Ok(())
    }

    pub fn bus_idx(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.bus_idx(id).map(|i| &self.buses[i])
    }

    pub fn source(&self) -> &SourceEquivalent {
        &self.sources[0]
    }

    pub fn line_between(&self, from: &str, to: &str) -> Option<usize> {
        self.lines.iter().position(|l| l.from == from && l.to == to)
    }

    /// Resolve a fault location name (`PCC`, `FAR`, ...) or a bus id.
    pub fn resolve_location(&self, name_or_bus: &str) -> Option<&str> {
        if let Some(loc) = self
            .fault_locations
            .iter()
            .find(|l| l.name.eq_ignore_ascii_case(name_or_bus))
        {
            return Some(&loc.bus);
        }
        self.bus(name_or_bus).map(|b| b.id.as_str())
    }

    /// Nominal phase-a angle (radians) of every bus with the source at its
    /// set angle and the transformer phase shifts applied.
    pub fn nominal_angles(&self) -> Vec<f64> {
        let n = self.buses.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for l in &self.lines {
            let (f, t) = (self.bus_index[&l.from], self.bus_index[&l.to]);
            adj[f].push((t, 0.0));
            adj[t].push((f, 0.0));
        }
        for tr in &self.transformers {
            let (f, t) = (self.bus_index[&tr.from], self.bus_index[&tr.to]);
            let shift = match tr.connection {
                Connection::DeltaYgLag30 => -30f64.to_radians(),
                Connection::YgYg => 0.0,
            };
            adj[f].push((t, shift));
            adj[t].push((f, -shift));
        }
        let mut angle = vec![f64::NAN; n];
        let src = self.bus_index[&self.source().bus];
        angle[src] = self.source().angle_deg.to_radians();
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &(v, shift) in &adj[u] {
                if angle[v].is_nan() {
                    angle[v] = angle[u] + shift;
                    queue.push_back(v);
                }
            }
        }
        angle.iter().map(|a| if a.is_nan() { 0.0 } else { *a }).collect()
    }

    /// Accumulated line length (km) from the feeder head to every bus
    /// reachable through lines, by shortest path. Unreachable buses map to
    /// `None`.
    pub fn distances_from_head(&self) -> Vec<Option<f64>> {
        let n = self.buses.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for l in &self.lines {
            let (f, t) = (self.bus_index[&l.from], self.bus_index[&l.to]);
            adj[f].push((t, l.length_km));
            adj[t].push((f, l.length_km));
        }
        let mut dist: Vec<Option<f64>> = vec![None; n];
        let head = self.bus_index[&self.feeder_head];
        dist[head] = Some(0.0);
        // Dijkstra without a heap: the feeder is small.
        let mut done = vec![false; n];
        loop {
            let next = (0..n)
                .filter(|&i| !done[i] && dist[i].is_some())
                .min_by(|&a, &b| dist[a].unwrap().total_cmp(&dist[b].unwrap()));
            let Some(u) = next else { break };
            done[u] = true;
            let du = dist[u].unwrap();
            for &(v, w) in &adj[u] {
                let cand = du + w;
                if dist[v].is_none_or(|dv: f64| cand < dv) {
                    dist[v] = Some(cand);
                }
            }
        }
        dist
    }

    /// Bus indices from the feeder head to the farthest three-phase
    /// distribution bus, along shortest paths.
    pub fn main_trunk(&self) -> Vec<usize> {
        let dist = self.distances_from_head();
        let Some(end) = (0..self.buses.len())
            .filter(|&b| self.buses[b].zone == Zone::Distribution && self.buses[b].phases.len() == 3)
            .filter_map(|b| dist[b].map(|d| (b, d)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(b, _)| b)
        else {
            return Vec::new();
        };
        let head = self.bus_index[&self.feeder_head];
        let mut path = vec![end];
        let mut cur = end;
        while cur != head {
            let d = dist[cur].expect("reachable bus");
            let prev = self.lines.iter().find_map(|l| {
                let (f, t) = (self.bus_index[&l.from], self.bus_index[&l.to]);
                let other = if f == cur {
                    t
                } else if t == cur {
                    f
                } else {
                    return None;
                };
                dist[other]
                    .filter(|x| (x + l.length_km - d).abs() <= 1e-9 * d.max(1.0))
                    .map(|_| other)
            });
            let Some(prev) = prev else { break };
            path.push(prev);
            cur = prev;
        }
        path.reverse();
        path
    }

    /// Indices of distribution-zone buses.
    pub fn feeder_buses(&self) -> Vec<usize> {
        self.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.zone == Zone::Distribution)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn phases_at(&self, bus: &str) -> Option<PhaseSet> {
        self.bus(bus).map(|b| b.phases)
    }

    pub fn has_phase(&self, bus: &str, p: Phase) -> bool {
        self.phases_at(bus).is_some_and(|s| s.contains(p))
    }
}
