use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dispatch::{apply_plr, Dispatch};
use super::scenario::Scenario;
use crate::devices::{frt_step, ibr_voltage_for_frt, FrtStatus, RegulatorTaps, TripCategory, TripCause};
use crate::netmodel::{stamp_fault, BusPhaseIndex, FaultSpec, NetError, NetworkModel};
use crate::solver::{solve_prefault, NetworkSolution, SolveError, Solver};

/// Re-solutions allowed at one timestamp before giving up.
pub const MAX_EVENT_ROUNDS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Network(#[from] NetError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("trips still cascading at t = {t_s:.4} s after {rounds} re-solutions")]
    EventIterationOverflow { t_s: f64, rounds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStage {
    Prefault,
    Fault,
    PostFault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub t_s: f64,
    pub stage: StepStage,
    /// Iterations of the last solve at this timestamp.
    pub iterations: usize,
    pub residual_pu: f64,
    pub converged: bool,
    /// Extra solves caused by trips at this timestamp.
    pub event_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub ibr_id: String,
    pub bus: String,
    pub category: TripCategory,
    pub trip_time_s: f64,
    pub cause: TripCause,
}

/// Everything recorded by one run.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub label: String,
    /// The dispatched network the run used.
    pub network: Arc<NetworkModel>,
    pub index: Arc<BusPhaseIndex>,
    pub fault: FaultSpec,
    pub plr: f64,
    pub voltage_regulation: bool,
    pub dispatch: Dispatch,
    pub taps: RegulatorTaps,
    pub t_on_s: f64,
    pub t_clear_s: f64,
    /// Sample times; the first sample is the pre-fault steady state.
    pub times: Vec<f64>,
    /// Node voltages per sample, indexed like `index`.
    pub voltages: Vec<Vec<Complex64>>,
    /// Online flag per IBR per sample.
    pub online: Vec<Vec<bool>>,
    pub trips: Vec<TripRecord>,
    pub log: Vec<StepLog>,
    pub warnings: Vec<String>,
}

impl SimulationResult {
    pub fn all_converged(&self) -> bool {
        self.log.iter().all(|s| s.converged)
    }

    pub fn tripped(&self, ibr_id: &str) -> bool {
        self.trips.iter().any(|t| t.ibr_id == ibr_id)
    }

    /// Sample closest to `t`.
    pub fn sample_at(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, tk) in self.times.iter().enumerate() {
            if (tk - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

fn solve_or_best(
    solver: &mut Solver<'_>,
    online: &[bool],
    sc: &Scenario,
    warm: &[Complex64],
) -> Result<NetworkSolution, EngineError> {
    match solver.solve(online, &sc.solver, Some(warm)) {
        Ok(s) => Ok(s),
        Err(SolveError::NotConverged(best)) => Ok(*best),
        Err(e) => Err(e.into()),
    }
}

/// Run the pre-fault, fault and post-fault timeline of one scenario.
///
/// Sample `k ≥ 1` sits at `t_on + k·dt` and holds the network state over the
/// preceding step; the fault is applied during the steps that start before
/// clearing. Inverter phase references are those measured at the previous
/// sample. FRT timers advance by `dt` per sample. Whenever units trip, the
/// network is re-solved at the same timestamp and every surviving unit is
/// re-evaluated from its state before the step, until no new unit trips.
pub fn run_scenario(sc: &Scenario) -> Result<SimulationResult, EngineError> {
    let (dispatched, dispatch) = apply_plr(&sc.network, sc.plr);
    let net = Arc::new(dispatched);
    let mut warnings = Vec::new();
    if dispatch.clamped {
        warnings.push(format!(
            "PLR {} needs {:.1} kW of PV but {:.1} kW is installed; PV capped at nameplate",
            sc.plr,
            sc.plr * dispatch.effective_load_kw,
            dispatch.installed_pv_kw
        ));
    }
    let n_ibr = net.ibrs.len();
    let mut online = vec![true; n_ibr];

    let pre = solve_prefault(&net, sc.voltage_regulation, &online, &sc.solver)?;
    warnings.extend(pre.warnings.iter().cloned());
    let index = pre.ybus.index.clone();
    let faulted = stamp_fault(&pre.ybus, &net, &sc.fault)?;
    let mut fault_solver = Solver::new(&net, faulted)?;
    let mut post_solver = Solver::new(&net, pre.ybus.clone())?;

    let ibr_rows: Vec<Vec<usize>> = net
        .ibrs
        .iter()
        .map(|u| {
            let bi = net.bus_idx(&u.bus).expect("validated bus");
            u.phases.iter().map(|p| index.row(bi, p).expect("validated phase")).collect()
        })
        .collect();
    let curves: Vec<_> = net.ibrs.iter().map(|u| &net.frt_curves[&u.frt_curve]).collect();
    let mut states: Vec<_> = curves.iter().map(|c| c.initial_state()).collect();

    let t_on = sc.fault.t_on_s;
    let t_clear = sc.fault.t_clear_s();
    let dt = sc.timeline.dt_s;
    let eps = 1e-9 * dt.max(1.0);

    let mut times = vec![t_on];
    let mut voltages = vec![pre.solution.voltages.clone()];
    let mut online_log = vec![online.clone()];
    let mut log = vec![StepLog {
        t_s: t_on,
        stage: StepStage::Prefault,
        iterations: pre.solution.iterations,
        residual_pu: pre.solution.residual,
        converged: pre.solution.converged,
        event_rounds: 0,
    }];
    if !pre.solution.converged {
        warnings.push("pre-fault solution did not converge; continuing with the best iterate".into());
    }
    let mut trips = Vec::new();
    post_solver.update_reference_angles(&pre.solution.voltages);
    let mut angles = post_solver.reference_angles().to_vec();
    let mut v_prev = pre.solution.voltages.clone();

    let mut k = 1usize;
    loop {
        let t = t_on + k as f64 * dt;
        if t > sc.timeline.t_end_s + eps {
            break;
        }
        let t_start = t - dt;
        let in_fault = t_start < t_clear - eps;
        let solver = if in_fault { &mut fault_solver } else { &mut post_solver };
        solver.set_angle_tracking(false);
        solver.set_reference_angles(&angles);
        let f_hz = sc.frequency_at(t);

        let before = states.clone();
        let mut sol = solve_or_best(solver, &online, sc, &v_prev)?;
        let mut rounds = 0;
        loop {
            let mut new_trips = Vec::new();
            for i in 0..n_ibr {
                if !online[i] {
                    continue;
                }
                let mags: Vec<f64> = ibr_rows[i].iter().map(|&r| sol.voltages[r].norm()).collect();
                let v = ibr_voltage_for_frt(&net.ibrs[i], &mags);
                states[i] = frt_step(curves[i], &before[i], v, f_hz, dt, t);
                if states[i].status == FrtStatus::Tripped {
                    new_trips.push(i);
                }
            }
            if new_trips.is_empty() {
                break;
            }
            for i in new_trips {
                online[i] = false;
                let u = &net.ibrs[i];
                trips.push(TripRecord {
                    ibr_id: u.id.clone(),
                    bus: u.bus.clone(),
                    category: u.category(),
                    trip_time_s: t,
                    cause: states[i].trip_cause.expect("tripped state has a cause"),
                });
            }
            rounds += 1;
            if rounds > MAX_EVENT_ROUNDS {
                return Err(EngineError::EventIterationOverflow { t_s: t, rounds });
            }
            let warm = sol.voltages.clone();
            sol = solve_or_best(solver, &online, sc, &warm)?;
        }
        solver.update_reference_angles(&sol.voltages);
        angles = solver.reference_angles().to_vec();
        log.push(StepLog {
            t_s: t,
            stage: if in_fault { StepStage::Fault } else { StepStage::PostFault },
            iterations: sol.iterations,
            residual_pu: sol.residual,
            converged: sol.converged,
            event_rounds: rounds,
        });
        times.push(t);
        v_prev = sol.voltages.clone();
        voltages.push(sol.voltages);
        online_log.push(online.clone());
        k += 1;
    }
    let failed = log.iter().filter(|s| !s.converged).count();
    if failed > 0 {
        warnings.push(format!("{failed} step(s) did not converge; best iterates recorded"));
    }

    Ok(SimulationResult {
        label: sc.label.clone(),
        network: net.clone(),
        index,
        fault: sc.fault.clone(),
        plr: sc.plr,
        voltage_regulation: sc.voltage_regulation,
        dispatch,
        taps: pre.taps,
        t_on_s: t_on,
        t_clear_s: t_clear,
        times,
        voltages,
        online: online_log,
        trips,
        log,
        warnings,
    })
}
