//! Timeline, trip bookkeeping and determinism of scenario runs.

mod common;

use common::*;
use tdfault::devices::{IbrKind, TripCategory};
use tdfault::engine::{apply_plr, run_scenario, run_sweep, PlrCase, StepStage, SweepMatrix};
use tdfault::metrics::trip_table;
use tdfault::netmodel::{FaultKind, Phase};

#[test]
fn zero_admittance_fault_leaves_the_steady_state_alone() {
    let net = small();
    let mut sc = scenario(&net, FaultKind::ThreePhaseToGround, "PCC", 0.5, false);
    // Built directly: validation rejects a zero admittance in files.
    sc.fault.y_fault_pu = 0.0;
    let r = run_scenario(&sc).expect("runs");
    assert!(r.trips.is_empty());
    assert!(r.all_converged());
    let pre = &r.voltages[0];
    for v in &r.voltages {
        for (a, b) in v.iter().zip(pre) {
            assert!((a - b).norm() < 1e-7, "{a} vs {b}");
        }
    }
}

#[test]
fn timeline_layout() {
    let net = small();
    let r = run(&net, FaultKind::SingleLineToGround, "PCC", 0.5, false);
    let dt = 1.0 / 60.0;
    assert_eq!(r.times[0], r.t_on_s);
    assert_eq!(r.log[0].stage, StepStage::Prefault);
    for (k, t) in r.times.iter().enumerate() {
        assert!((t - (r.t_on_s + k as f64 * dt)).abs() < 1e-12);
    }
    assert!(*r.times.last().unwrap() <= r.t_clear_s + 1.0 + 1e-9);
    let k_clear = r.sample_at(r.t_clear_s);
    assert!((r.times[k_clear] - r.t_clear_s).abs() < 1e-9);
    assert_eq!(r.log[k_clear].stage, StepStage::Fault);
    assert_eq!(r.log[k_clear + 1].stage, StepStage::PostFault);
    assert_eq!(fault_samples(&r).len(), 15);
    assert_eq!(r.voltages.len(), r.times.len());
    assert_eq!(r.online.len(), r.times.len());
}

#[test]
fn trips_are_latched_and_consistent_with_the_online_log() {
    let net = small();
    for kind in FaultKind::ALL {
        let r = run(&net, kind, "PCC", 1.0, false);
        for (i, u) in r.network.ibrs.iter().enumerate() {
            let first_off = r.online.iter().position(|o| !o[i]);
            if let Some(k) = first_off {
                assert!(r.online[k..].iter().all(|o| !o[i]), "{} came back online", u.id);
                let rec = r.trips.iter().find(|t| t.ibr_id == u.id).expect("trip recorded");
                assert!((rec.trip_time_s - r.times[k]).abs() < 1e-12);
                assert_eq!(rec.category, u.category());
            } else {
                assert!(!r.tripped(&u.id));
            }
        }
        let mut ids: Vec<_> = r.trips.iter().map(|t| &t.ibr_id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), r.trips.len(), "a unit tripped twice");
    }
}

#[test]
fn event_rounds_follow_trips() {
    let net = small();
    let r = run(&net, FaultKind::SingleLineToGround, "PCC", 0.5, false);
    for (k, step) in r.log.iter().enumerate() {
        let tripped_here = r.trips.iter().any(|t| (t.trip_time_s - r.times[k]).abs() < 1e-12);
        assert_eq!(step.event_rounds > 0, tripped_here, "sample {k}");
    }
}

#[test]
fn deep_sag_trips_after_the_shortest_clearing_time() {
    let net = small();
    let r = run(&net, FaultKind::SingleLineToGround, "PCC", 0.5, false);
    let dt = 1.0 / 60.0;
    let roof_a: Vec<_> = r
        .network
        .ibrs
        .iter()
        .filter(|u| u.kind == IbrKind::RooftopPv && u.phases.contains(Phase::A))
        .collect();
    assert!(!roof_a.is_empty());
    for u in roof_a {
        let t = r.trips.iter().find(|t| t.ibr_id == u.id).expect("phase-a rooftop trips").trip_time_s;
        assert!((t - r.t_on_s - 0.15).abs() <= dt + 1e-9, "{} tripped at {t}", u.id);
    }
}

#[test]
fn runs_are_deterministic() {
    let net = small();
    let a = run(&net, FaultKind::DoubleLineToGround, "SHORT", 3.0, true);
    let b = run(&net, FaultKind::DoubleLineToGround, "SHORT", 3.0, true);
    assert_eq!(a.voltages, b.voltages);
    assert_eq!(a.trips, b.trips);
    assert_eq!(a.log, b.log);
}

#[test]
fn sweep_order_and_results_do_not_depend_on_jobs() {
    let net = small();
    let base = scenario(&net, FaultKind::SingleLineToGround, "PCC", 0.5, false);
    let matrix = SweepMatrix {
        kinds: vec![FaultKind::SingleLineToGround, FaultKind::LineToLine],
        locations: vec!["PCC".into(), "GTF".into()],
        plr_cases: vec![PlrCase::new(0.5, false), PlrCase::new(3.0, false)],
    };
    let serial = run_sweep(&base, &matrix, 1);
    let parallel = run_sweep(&base, &matrix, 3);
    let labels: Vec<_> = serial.iter().map(|o| o.cell.label()).collect();
    assert_eq!(labels[0], "SL2G_PCC_plr50");
    assert_eq!(labels[3], "SL2G_GTF_plr300");
    assert_eq!(labels[4], "L2L_PCC_plr50");
    let table = |v: &[tdfault::engine::SweepOutcome]| {
        trip_table(v.iter().map(|o| o.result.as_ref().expect("cell runs")))
    };
    assert_eq!(table(&serial), table(&parallel));
}

#[test]
fn unknown_location_fails_only_its_cell() {
    let net = small();
    let base = scenario(&net, FaultKind::SingleLineToGround, "PCC", 0.5, false);
    let matrix = SweepMatrix {
        kinds: vec![FaultKind::SingleLineToGround],
        locations: vec!["PCC".into(), "nowhere".into()],
        plr_cases: vec![PlrCase::new(0.5, false)],
    };
    let out = run_sweep(&base, &matrix, 2);
    assert!(out[0].result.is_ok());
    assert!(out[1].result.is_err());
}

#[test]
fn dispatch_matches_the_plr_definition() {
    let net = reference();
    let (dispatched, d) = apply_plr(&net, 3.0);
    // 1.3 MW of load plus 0.3 and 0.1 MW of battery charging
    assert!((d.effective_load_kw - 1700.0).abs() < 1e-6);
    // 3 MW farm plus 86 rooftops sharing 4.5 MW
    assert!((d.installed_pv_kw - 7500.0).abs() < 1e-6);
    assert!((d.factor - 5100.0 / 7500.0).abs() < 1e-12);
    assert!(!d.clamped);
    let pv: f64 = dispatched.ibrs.iter().filter(|u| u.kind.is_pv()).map(|u| u.p_set_kw).sum();
    assert!((pv - 5100.0).abs() < 1e-6);
    let bess: Vec<f64> = dispatched.ibrs.iter().filter(|u| u.kind == IbrKind::Bess).map(|u| u.p_set_kw).collect();
    assert_eq!(bess, vec![-300.0, -100.0]);

    let (_, clamped) = apply_plr(&net, 10.0);
    assert!(clamped.clamped && clamped.factor == 1.0);
}

#[test]
fn starved_solver_flags_steps_and_keeps_going() {
    let net = small();
    let mut sc = scenario(&net, FaultKind::SingleLineToGround, "PCC", 0.5, false);
    sc.solver.max_iter = 1;
    let r = run_scenario(&sc).expect("runs with best iterates");
    assert!(!r.all_converged());
    assert_eq!(r.times.len(), r.log.len());
    assert!(r.warnings.iter().any(|w| w.contains("did not converge")));
}

#[test]
fn category_totals_cover_every_unit() {
    let net = reference();
    let r = run(&net, FaultKind::ThreePhaseToGround, "FAR", 0.5, false);
    let rows = trip_table([&r]);
    let total: usize = rows.iter().map(|x| x.n_total).sum();
    assert_eq!(total, net.ibrs.len());
    let three = rows.iter().find(|x| x.category == TripCategory::ThreePhase).unwrap();
    assert_eq!(three.n_total, 3);
}
