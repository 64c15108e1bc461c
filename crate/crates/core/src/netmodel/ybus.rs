//! Phase-domain admittance matrix assembly.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::network::{Connection, NetworkModel, TransformerBranch};
use super::phase::Phase;
use super::sequence::seq_to_phase_impedance;
use super::NetError;
use crate::devices::RegulatorTaps;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix stored by coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i < self.n && j < self.n, "index ({i},{j}) out of range {}", self.n);
        *self.entries.entry((i, j)).or_insert(ZERO) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or(ZERO)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        for (&(i, j), v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for (&(i, j), v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest `|Y_ij − Y_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), v)| (v - self.get(j, i)).norm())
            .fold(0.0, f64::max)
    }
}

/// Row assignment for every existing (bus, phase) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BusPhaseIndex {
    rows: Vec<(usize, Phase)>,
    by_bus: Vec<[Option<usize>; 3]>,
}

impl BusPhaseIndex {
    pub fn new(net: &NetworkModel) -> Self {
        let mut rows = Vec::new();
        let mut by_bus = vec![[None; 3]; net.buses.len()];
        for (bi, bus) in net.buses.iter().enumerate() {
            for p in bus.phases.iter() {
                by_bus[bi][p.index()] = Some(rows.len());
                rows.push((bi, p));
            }
        }
        Self { rows, by_bus }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, bus: usize, p: Phase) -> Option<usize> {
        self.by_bus.get(bus).and_then(|r| r[p.index()])
    }

    pub fn bus_rows(&self, bus: usize) -> [Option<usize>; 3] {
        self.by_bus[bus]
    }

    /// `(bus index, phase)` of a row.
    pub fn entry(&self, row: usize) -> (usize, Phase) {
        self.rows[row]
    }

    pub fn rows(&self) -> &[(usize, Phase)] {
        &self.rows
    }
}

/// What to include when assembling the matrix.
#[derive(Debug, Clone, Default)]
pub struct StampOptions {
    /// Regulator taps; `None` uses the taps stored on each regulator.
    pub taps: Option<RegulatorTaps>,
    /// Stamp shunt capacitors (voltage regulation scenarios only).
    pub capacitors: bool,
    /// Leave out the constant-impedance portion of ZIP loads.
    pub skip_load_impedance: bool,
}

/// Per-unit admittance matrix plus the source's Norton current.
#[derive(Debug, Clone, PartialEq)]
pub struct YBus {
    pub index: Arc<BusPhaseIndex>,
    pub matrix: SparseMatrix,
    /// Norton current of the source equivalent, one entry per row.
    pub source_current: Vec<Complex64>,
}

impl YBus {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Assemble with default options: stored taps, no capacitors, ZIP
/// impedance portions included, source Norton stamped.
pub fn build_ybus(net: &NetworkModel) -> Result<YBus, NetError> {
    build_ybus_with(net, &StampOptions::default())
}

pub fn build_ybus_with(net: &NetworkModel, opts: &StampOptions) -> Result<YBus, NetError> {
    let index = Arc::new(BusPhaseIndex::new(net));
    check_energized(net, &index)?;
    let mut m = build_passive(net, &index, opts)?;
    let n = index.len();

    let s_base_kva = net.s_base_mva * 1000.0;
    if !opts.skip_load_impedance {
        for load in &net.loads {
            let row = row_of(net, &index, &load.bus, load.phase)?;
            let s_pu = load.s_nominal_kva * (3.0 / s_base_kva);
            m.add(row, row, load.constant_impedance_admittance(s_pu));
        }
    }

    let mut source_current = vec![ZERO; n];
    let src = net.source();
    let y_src = Complex64::new(1.0, 0.0) / src.z_internal_pu;
    let bi = net.bus_idx(&src.bus).ok_or_else(|| NetError::UnknownBus(src.bus.clone()))?;
    for p in Phase::ALL {
        let row = index.row(bi, p).ok_or_else(|| NetError::PhaseMismatch {
            bus: src.bus.clone(),
            phases: p.to_string(),
        })?;
        let angle = src.angle_deg.to_radians() - 2.0 * std::f64::consts::PI / 3.0 * p.index() as f64;
        let emf = Complex64::from_polar(src.v_set_pu, angle);
        m.add(row, row, y_src);
        source_current[row] = emf * y_src;
    }

    Ok(YBus {
        index,
        matrix: m,
        source_current,
    })
}

/// Lines, transformers, regulators and (optionally) capacitors only.
pub fn build_passive_ybus(net: &NetworkModel, opts: &StampOptions) -> Result<SparseMatrix, NetError> {
    let index = BusPhaseIndex::new(net);
    build_passive(net, &index, opts)
}

fn row_of(net: &NetworkModel, index: &BusPhaseIndex, bus: &str, p: Phase) -> Result<usize, NetError> {
    let bi = net.bus_idx(bus).ok_or_else(|| NetError::UnknownBus(bus.to_string()))?;
    index.row(bi, p).ok_or_else(|| NetError::PhaseMismatch {
        bus: bus.to_string(),
        phases: p.to_string(),
    })
}

fn build_passive(
    net: &NetworkModel,
    index: &BusPhaseIndex,
    opts: &StampOptions,
) -> Result<SparseMatrix, NetError> {
    let mut m = SparseMatrix::new(index.len());

    // regulator ratio per (line index, phase)
    let mut ratios: HashMap<usize, [f64; 3]> = HashMap::new();
    for (ri, reg) in net.regulators.iter().enumerate() {
        let li = net
            .line_between(&reg.from, &reg.to)
            .ok_or_else(|| NetError::InvalidModel(format!("regulator {} has no line", reg.id)))?;
        let taps = match &opts.taps {
            Some(t) => t.get(ri),
            None => reg.taps,
        };
        let entry = ratios.entry(li).or_insert([1.0; 3]);
        for p in reg.phases.iter() {
            entry[p.index()] *= reg.ratio(taps[p.index()]);
        }
    }

    for (li, line) in net.lines.iter().enumerate() {
        let fb = net.bus_idx(&line.from).ok_or_else(|| NetError::UnknownBus(line.from.clone()))?;
        let tb = net.bus_idx(&line.to).ok_or_else(|| NetError::UnknownBus(line.to.clone()))?;
        let z_base = net.buses[fb].z_base_ohm(net.s_base_mva);
        let zabc = seq_to_phase_impedance(line.z1_per_km, line.z0_per_km) * Complex64::from(line.length_km / z_base);
        let phases = line.phases.to_vec();
        let k = phases.len();
        let zsub = DMatrix::from_fn(k, k, |i, j| zabc[(phases[i].index(), phases[j].index())]);
        let ysub = zsub.try_inverse().ok_or_else(|| {
            NetError::InvalidModel(format!("line {} has a singular impedance matrix", line.id))
        })?;
        let ratio = ratios.get(&li).copied().unwrap_or([1.0; 3]);
        for (i, pi) in phases.iter().enumerate() {
            let fi = index.row(fb, *pi).expect("validated phase");
            let ti = index.row(tb, *pi).expect("validated phase");
            let ai = ratio[pi.index()];
            for (j, pj) in phases.iter().enumerate() {
                let fj = index.row(fb, *pj).expect("validated phase");
                let tj = index.row(tb, *pj).expect("validated phase");
                let aj = ratio[pj.index()];
                let y = ysub[(i, j)];
                m.add(fi, fj, y * ai * aj);
                m.add(fi, tj, -y * ai);
                m.add(ti, fj, -y * aj);
                m.add(ti, tj, y);
            }
        }
    }

    for tr in &net.transformers {
        let fb = net.bus_idx(&tr.from).ok_or_else(|| NetError::UnknownBus(tr.from.clone()))?;
        let tb = net.bus_idx(&tr.to).ok_or_else(|| NetError::UnknownBus(tr.to.clone()))?;
        let block = transformer_block(tr, net.s_base_mva);
        let rows: Vec<usize> = Phase::ALL
            .iter()
            .map(|p| index.row(fb, *p).expect("validated phase"))
            .chain(Phase::ALL.iter().map(|p| index.row(tb, *p).expect("validated phase")))
            .collect();
        for i in 0..6 {
            for j in 0..6 {
                let v = block[(i, j)];
                if v != ZERO {
                    m.add(rows[i], rows[j], v);
                }
            }
        }
    }

    if opts.capacitors {
        let s_base_kvar = net.s_base_mva * 1000.0;
        for cap in net.capacitors.iter().filter(|c| c.enabled) {
            let bi = net.bus_idx(&cap.bus).ok_or_else(|| NetError::UnknownBus(cap.bus.clone()))?;
            for p in cap.phases.iter() {
                let row = index.row(bi, p).expect("validated phase");
                m.add(row, row, Complex64::new(0.0, 3.0 * cap.q_rated_kvar / s_base_kvar));
            }
        }
    }
    Ok(m)
}

/// 6×6 nodal admittance block `[HV a b c, LV a b c]` of a two-winding
/// three-phase bank, on the system base.
///
/// Each phase unit is an ideal 1:1 (per-unit) transformer behind the leakage
/// admittance `y`, so `Y = y · Dᵀ D` where `D` maps node voltages to the
/// difference between primary and secondary winding voltages. Winding
/// voltages of the delta side are line-to-line voltages scaled by `1/√3`.
/// The LV neutral is carried as a seventh node and then grounded or
/// eliminated.
pub fn transformer_block(tr: &TransformerBranch, s_base_mva: f64) -> DMatrix<Complex64> {
    let z_sys = tr.z_leak_pu * (s_base_mva / tr.s_rated_mva);
    let y = Complex64::new(1.0, 0.0) / z_sys;
    let r3 = 1.0 / 3f64.sqrt();
    // D is 3 windings × 7 nodes (HV a b c, LV a b c, LV neutral)
    let mut d = DMatrix::<f64>::zeros(3, 7);
    for k in 0..3 {
        match tr.connection {
            Connection::DeltaYgLag30 => {
                // LV phase k paired with the delta winding across (k, k-1)
                d[(k, k)] += r3;
                d[(k, (k + 2) % 3)] -= r3;
            }
            Connection::YgYg => d[(k, k)] += 1.0,
        }
        d[(k, 3 + k)] -= 1.0;
        d[(k, 6)] += 1.0;
    }
    let dd = d.transpose() * &d;
    let mut full = dd.map(|v| y * v);
    let neutral = if tr.grounded && tr.z_ground_pu.is_none() {
        None
    } else {
        if let Some(zg) = tr.z_ground_pu {
            full[(6, 6)] += Complex64::new(1.0, 0.0) / (zg * (s_base_mva / tr.s_rated_mva));
        }
        Some(full[(6, 6)])
    };
    DMatrix::from_fn(6, 6, |i, j| match neutral {
        None => full[(i, j)],
        Some(ynn) => full[(i, j)] - full[(i, 6)] * full[(6, j)] / ynn,
    })
}

/// Every (bus, phase) row must be reachable from the source through
/// branches that carry that phase.
fn check_energized(net: &NetworkModel, index: &BusPhaseIndex) -> Result<(), NetError> {
    let n = index.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for line in &net.lines {
        let (Some(fb), Some(tb)) = (net.bus_idx(&line.from), net.bus_idx(&line.to)) else {
            continue;
        };
        for p in line.phases.iter() {
            if let (Some(a), Some(b)) = (index.row(fb, p), index.row(tb, p)) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    for tr in &net.transformers {
        let (Some(fb), Some(tb)) = (net.bus_idx(&tr.from), net.bus_idx(&tr.to)) else {
            continue;
        };
        let rows: Vec<usize> = index
            .bus_rows(fb)
            .iter()
            .chain(index.bus_rows(tb).iter())
            .flatten()
            .copied()
            .collect();
        for &a in &rows {
            for &b in &rows {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    if let Some(sb) = net.bus_idx(&net.source().bus) {
        for r in index.bus_rows(sb).iter().flatten() {
            seen[*r] = true;
            queue.push_back(*r);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    if let Some(row) = seen.iter().position(|s| !s) {
        let (bi, p) = index.entry(row);
        return Err(NetError::SingularNetwork {
            bus: net.buses[bi].id.clone(),
            phase: p,
        });
    }
    Ok(())
}

/// Direct dense solve of `m · x = rhs`; `None` when singular.
pub fn dense_solve(m: &SparseMatrix, rhs: &[Complex64]) -> Option<Vec<Complex64>> {
    let lu = m.to_dense().lu();
    lu.solve(&DVector::from_column_slice(rhs)).map(|v| v.iter().copied().collect())
}
