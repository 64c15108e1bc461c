//! Fixed-point current-injection solution of the unbalanced network.
//!
//! Linear elements (lines, transformers, regulators, capacitors, the
//! constant-impedance share of loads, the source Norton admittance and any
//! fault) live in the admittance matrix, which is factored once. Everything
//! voltage-dependent is a current injection re-evaluated each iteration:
//!
//! ```text
//! V(k+1) = (1 − ρ)·V(k) + ρ·Y⁻¹·(I_source + I_devices(V(k)))
//! ```

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::devices::{ibr_injection, ibr_injection_locked, reference_angle, regulator_control, RegulatorTaps};
use crate::netmodel::{build_ybus_with, NetError, NetworkModel, StampOptions, YBus};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Restarts at successively halved relaxation before giving up.
pub const MAX_RELAXATION_HALVINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSettings {
    pub tol_pu: f64,
    pub max_iter: usize,
    pub relaxation: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol_pu: 1e-6,
            max_iter: 100,
            relaxation: 1.0,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol_pu > 0.0) {
            return Err("tol_pu must be positive".into());
        }
        if self.max_iter < 1 {
            return Err("max_iter must be at least 1".into());
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err("relaxation must lie in (0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    /// Node voltages by admittance-matrix row, per-unit.
    pub voltages: Vec<Complex64>,
    /// Per-IBR phase currents on the system base, generator convention.
    /// Empty for offline units.
    pub ibr_currents: Vec<Vec<Complex64>>,
    pub iterations: usize,
    /// Largest KCL mismatch, per-unit current.
    pub residual: f64,
    pub converged: bool,
    pub relaxation: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("admittance matrix is singular")]
    SingularMatrix,
    #[error("no convergence after {} iterations (residual {:.3e} pu)", .0.iterations, .0.residual)]
    NotConverged(Box<NetworkSolution>),
    #[error(transparent)]
    Network(#[from] NetError),
}

/// LU factorization of an admittance matrix.
pub struct FactoredSystem {
    ybus: YBus,
    lu: LU<Complex64, Dyn, Dyn>,
}

impl FactoredSystem {
    pub fn new(ybus: YBus) -> Result<Self, SolveError> {
        let dense: DMatrix<Complex64> = ybus.matrix.to_dense();
        let lu = dense.lu();
        if !lu.is_invertible() {
            return Err(SolveError::SingularMatrix);
        }
        Ok(Self { ybus, lu })
    }

    pub fn ybus(&self) -> &YBus {
        &self.ybus
    }

    pub fn solve_linear(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>, SolveError> {
        self.lu
            .solve(&DVector::from_column_slice(rhs))
            .map(|v| v.as_slice().to_vec())
            .ok_or(SolveError::SingularMatrix)
    }
}

struct LoadEntry {
    load: usize,
    row: usize,
    s_pu: Complex64,
}

struct IbrEntry {
    rows: Vec<usize>,
    scale: f64,
}

/// Voltage-dependent current sources of a network.
pub struct Injector {
    loads: Vec<LoadEntry>,
    ibrs: Vec<IbrEntry>,
    include_impedance_share: bool,
}

impl Injector {
    pub fn new(net: &NetworkModel, ybus: &YBus, include_impedance_share: bool) -> Self {
        let index = &ybus.index;
        let s_base_kva = net.s_base_mva * 1000.0;
        let loads = net
            .loads
            .iter()
            .enumerate()
            .filter_map(|(k, l)| {
                let bi = net.bus_idx(&l.bus)?;
                Some(LoadEntry {
                    load: k,
                    row: index.row(bi, l.phase)?,
                    s_pu: l.s_nominal_kva * (3.0 / s_base_kva),
                })
            })
            .collect();
        let ibrs = net
            .ibrs
            .iter()
            .map(|u| {
                let bi = net.bus_idx(&u.bus).expect("validated bus");
                IbrEntry {
                    rows: u
                        .phases
                        .iter()
                        .map(|p| index.row(bi, p).expect("validated phase"))
                        .collect(),
                    scale: u.system_current_scale(net.s_base_mva),
                }
            })
            .collect();
        Self {
            loads,
            ibrs,
            include_impedance_share,
        }
    }

    /// Total device injection per row (generator convention) and the
    /// per-IBR currents. `angles` holds each IBR's last valid reference
    /// angle; with `track` set the references follow `v` and `angles` is
    /// updated in place, otherwise they stay locked.
    pub fn currents(
        &self,
        net: &NetworkModel,
        v: &[Complex64],
        online: &[bool],
        angles: &mut [f64],
        track: bool,
    ) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let mut inj = vec![ZERO; v.len()];
        for e in &self.loads {
            let load = &net.loads[e.load];
            let vr = v[e.row];
            let mut drawn = load.nonlinear_current(e.s_pu, vr);
            if self.include_impedance_share {
                drawn += load.constant_impedance_admittance(e.s_pu) * vr;
            }
            inj[e.row] -= drawn;
        }
        let mut per_ibr = Vec::with_capacity(self.ibrs.len());
        let mut vt = Vec::with_capacity(3);
        for (k, e) in self.ibrs.iter().enumerate() {
            if !online.get(k).copied().unwrap_or(true) {
                per_ibr.push(Vec::new());
                continue;
            }
            vt.clear();
            vt.extend(e.rows.iter().map(|&r| v[r]));
            let currents = if track {
                let out = ibr_injection(&net.ibrs[k], &vt, angles[k]);
                angles[k] = out.reference_angle;
                out.currents
            } else {
                ibr_injection_locked(&net.ibrs[k], &vt, angles[k])
            };
            let sys: Vec<Complex64> = currents.iter().map(|i| i * e.scale).collect();
            for (&r, i) in e.rows.iter().zip(&sys) {
                inj[r] += i;
            }
            per_ibr.push(sys);
        }
        (inj, per_ibr)
    }
}

/// Largest `|Y·V − I_source − I_devices|` over all rows.
pub fn kcl_residual(y: &YBus, v: &[Complex64], device_injection: &[Complex64]) -> f64 {
    y.matrix
        .mul_vec(v)
        .iter()
        .zip(&y.source_current)
        .zip(device_injection)
        .map(|((yv, is), id)| (yv - is - id).norm())
        .fold(0.0, f64::max)
}

/// Balanced 1 pu start with each bus at its nominal angle.
pub fn flat_start(net: &NetworkModel, y: &YBus) -> Vec<Complex64> {
    let angles = net.nominal_angles();
    let v_set = net.source().v_set_pu;
    y.index
        .rows()
        .iter()
        .map(|&(bi, p)| {
            let a = angles[bi] - 2.0 * std::f64::consts::PI / 3.0 * p.index() as f64;
            Complex64::from_polar(v_set, a)
        })
        .collect()
}

/// Reusable solver bound to one factored matrix.
///
/// By default each IBR's phase reference follows its terminal voltage
/// inside the iteration. With tracking off the references stay at the
/// stored angles, which models a phase-locked loop that lags the network by
/// one solution. A unit whose own current sets its terminal voltage angle
/// (deep faults, weak buses) has no tracked fixed point; locked references
/// always leave one.
pub struct Solver<'a> {
    net: &'a NetworkModel,
    system: FactoredSystem,
    injector: Injector,
    angles: Vec<f64>,
    track_angles: bool,
}

impl<'a> Solver<'a> {
    pub fn new(net: &'a NetworkModel, ybus: YBus) -> Result<Self, SolveError> {
        let injector = Injector::new(net, &ybus, false);
        let flat = flat_start(net, &ybus);
        let angles = net
            .ibrs
            .iter()
            .map(|u| {
                let bi = net.bus_idx(&u.bus).expect("validated bus");
                let p = u.phases.iter().next().expect("non-empty phases");
                flat[ybus.index.row(bi, p).expect("validated phase")].arg()
            })
            .collect();
        Ok(Self {
            net,
            system: FactoredSystem::new(ybus)?,
            injector,
            angles,
            track_angles: true,
        })
    }

    pub fn ybus(&self) -> &YBus {
        self.system.ybus()
    }

    pub fn reference_angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn set_reference_angles(&mut self, angles: &[f64]) {
        self.angles.copy_from_slice(angles);
    }

    pub fn set_angle_tracking(&mut self, track: bool) {
        self.track_angles = track;
    }

    /// Move every reference to the angle measured in `v`, keeping the old
    /// angle where the control voltage is below the floor.
    pub fn update_reference_angles(&mut self, v: &[Complex64]) {
        let index = &self.system.ybus().index;
        for (k, u) in self.net.ibrs.iter().enumerate() {
            let bi = self.net.bus_idx(&u.bus).expect("validated bus");
            let vt: Vec<Complex64> = u
                .phases
                .iter()
                .map(|p| v[index.row(bi, p).expect("validated phase")])
                .collect();
            self.angles[k] = reference_angle(u, &vt, self.angles[k]);
        }
    }

    /// Solve from `warm` (or a flat start) for the given online mask.
    ///
    /// If the iteration diverges or runs out of iterations it is restarted
    /// from the same starting point with the relaxation halved, down to one
    /// eighth of the configured value. The best iterate over all attempts is
    /// returned on failure.
    pub fn solve(
        &mut self,
        online: &[bool],
        settings: &SolveSettings,
        warm: Option<&[Complex64]>,
    ) -> Result<NetworkSolution, SolveError> {
        let start = match warm {
            Some(w) => w.to_vec(),
            None => flat_start(self.net, self.system.ybus()),
        };
        let angles0 = self.angles.clone();
        let mut best: Option<NetworkSolution> = None;
        let mut rho = settings.relaxation;
        for _ in 0..=MAX_RELAXATION_HALVINGS {
            self.angles.copy_from_slice(&angles0);
            match self.iterate(online, settings, rho, start.clone())? {
                Outcome::Done(sol) => return Ok(sol),
                Outcome::Diverging(b) | Outcome::Exhausted(b) => {
                    if best.as_ref().is_none_or(|x| b.residual < x.residual) {
                        best = Some(b);
                    }
                }
            }
            rho /= 2.0;
        }
        Err(SolveError::NotConverged(Box::new(best.expect("at least one attempt"))))
    }

    fn iterate(
        &mut self,
        online: &[bool],
        settings: &SolveSettings,
        rho: f64,
        mut v: Vec<Complex64>,
    ) -> Result<Outcome, SolveError> {
        let net = self.net;
        let y = self.system.ybus();
        let track = self.track_angles;
        let (mut inj, mut per_ibr) = self.injector.currents(net, &v, online, &mut self.angles, track);
        let mut best: Option<NetworkSolution> = None;
        let mut last_dv = f64::INFINITY;
        let mut growth = 0;
        let mut rhs = vec![ZERO; v.len()];
        for it in 1..=settings.max_iter {
            for ((r, s), d) in rhs.iter_mut().zip(&y.source_current).zip(&inj) {
                *r = s + d;
            }
            let target = self.system.solve_linear(&rhs)?;
            let mut dv = 0.0f64;
            for (vi, ti) in v.iter_mut().zip(&target) {
                let next = *vi + (ti - *vi) * rho;
                dv = dv.max((next - *vi).norm());
                *vi = next;
            }
            (inj, per_ibr) = self.injector.currents(net, &v, online, &mut self.angles, track);
            let residual = kcl_residual(y, &v, &inj);
            let sol = NetworkSolution {
                voltages: v.clone(),
                ibr_currents: per_ibr.clone(),
                iterations: it,
                residual,
                converged: false,
                relaxation: rho,
            };
            if dv < settings.tol_pu && residual <= settings.tol_pu {
                return Ok(Outcome::Done(NetworkSolution {
                    converged: true,
                    ..sol
                }));
            }
            if !v.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
                return Ok(Outcome::Diverging(best.unwrap_or(sol)));
            }
            growth = if dv > last_dv { growth + 1 } else { 0 };
            last_dv = dv;
            if best.as_ref().is_none_or(|b| residual < b.residual) {
                best = Some(sol);
            }
            if growth >= 3 {
                return Ok(Outcome::Diverging(best.expect("set above")));
            }
        }
        let _ = per_ibr;
        Ok(Outcome::Exhausted(best.expect("max_iter >= 1")))
    }
}

enum Outcome {
    Done(NetworkSolution),
    Diverging(NetworkSolution),
    Exhausted(NetworkSolution),
}

/// Cold-start solve of `y` with all IBRs in `online` enabled.
pub fn solve(
    y: &YBus,
    net: &NetworkModel,
    online: &[bool],
    settings: &SolveSettings,
) -> Result<NetworkSolution, SolveError> {
    Solver::new(net, y.clone())?.solve(online, settings, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefaultSolution {
    pub solution: NetworkSolution,
    pub taps: RegulatorTaps,
    /// Healthy admittance matrix with the final taps and capacitor states.
    pub ybus: YBus,
    /// Regulator control passes performed.
    pub sweeps: usize,
    pub warnings: Vec<String>,
}

/// Pre-fault steady state, with regulator control when `voltage_regulation`
/// is set. Capacitors are in service only with voltage regulation.
///
/// A solve that fails to converge ends the control loop; its best iterate is
/// returned with `converged == false` and a warning.
pub fn solve_prefault(
    net: &NetworkModel,
    voltage_regulation: bool,
    online: &[bool],
    settings: &SolveSettings,
) -> Result<PrefaultSolution, SolveError> {
    let mut taps = RegulatorTaps::from_network(net);
    let max_range = net.regulators.iter().map(|r| r.tap_range).max().unwrap_or(0);
    let max_sweeps = if voltage_regulation { 3 * max_range.max(1) as usize } else { 0 };
    let mut warnings = Vec::new();
    let mut seen = HashSet::from([taps.clone()]);
    let mut warm: Option<Vec<Complex64>> = None;
    let mut sweeps = 0;
    loop {
        let opts = StampOptions {
            taps: Some(taps.clone()),
            capacitors: voltage_regulation,
            skip_load_impedance: false,
        };
        let ybus = build_ybus_with(net, &opts)?;
        let mut solver = Solver::new(net, ybus.clone())?;
        let solution = match solver.solve(online, settings, warm.as_deref()) {
            Ok(s) => s,
            Err(SolveError::NotConverged(best)) => {
                warnings.push(format!(
                    "pre-fault solve did not converge (residual {:.3e} pu)",
                    best.residual
                ));
                return Ok(PrefaultSolution {
                    solution: *best,
                    taps,
                    ybus,
                    sweeps,
                    warnings,
                });
            }
            Err(e) => return Err(e),
        };
        if sweeps >= max_sweeps {
            if voltage_regulation {
                warnings.push(format!("regulator taps still moving after {sweeps} control passes"));
            }
            return Ok(PrefaultSolution { solution, taps, ybus, sweeps, warnings });
        }
        let mut next = taps.clone();
        sweeps += 1;
        if !regulator_control(net, &ybus.index, &solution.voltages, &mut next) {
            return Ok(PrefaultSolution { solution, taps, ybus, sweeps, warnings });
        }
        if !seen.insert(next.clone()) {
            warnings.push(format!(
                "regulator taps oscillate after {sweeps} control passes; frozen at the last state"
            ));
            return Ok(PrefaultSolution { solution, taps, ybus, sweeps, warnings });
        }
        taps = next;
        warm = Some(solution.voltages);
    }
}
