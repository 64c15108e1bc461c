//! Network and scenario files: shipped data, diagnostics, round trips.

mod common;

use common::*;
use serde_json::json;
use tdfault::devices::{IbrKind, TripCategory};
use tdfault::ingest::{
    load_network, load_scenario, network_to_json, parse_network, parse_scenario_file, place_rooftops, resolve_scenario,
    DiagnosticKind, RooftopPlan,
};

#[test]
fn shipped_networks_are_clean() {
    for name in ["ieee123_td.json", "feeder13_td.json"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let parsed = parse_network(&text);
        assert!(parsed.diagnostics.is_empty(), "{name}: {:?}", parsed.diagnostics);
        let net = parsed.value.unwrap();
        let roofs: Vec<_> = net.ibrs.iter().filter(|u| u.kind == IbrKind::RooftopPv).collect();
        assert_eq!(roofs.len(), 86);
        let total: f64 = roofs.iter().map(|u| u.s_rated_kva).sum();
        assert!((total - 4500.0).abs() < 1e-6);
        let per_phase = |c: TripCategory| roofs.iter().filter(|u| u.category() == c).count();
        assert_eq!(
            [per_phase(TripCategory::PhaseA), per_phase(TripCategory::PhaseB), per_phase(TripCategory::PhaseC)],
            [29, 29, 28]
        );
        for loc in ["PCC", "SHORT", "MEDIUM", "FAR", "GTF"] {
            assert!(net.resolve_location(loc).is_some(), "{name}: {loc}");
        }
        assert_eq!(net.resolve_location("PCC"), Some("3"));
        assert_eq!(net.resolve_location("GTF"), Some("1"));
    }
}

#[test]
fn reference_feeder_has_the_study_load() {
    let net = reference();
    let kw: f64 = net.loads.iter().map(|l| l.s_nominal_kva.re).sum();
    assert!((kw - 1300.0).abs() < 1e-6);
    assert!(net.buses.len() > 120);
}

#[test]
fn serialization_round_trips() {
    for net in [reference(), small()] {
        let text = network_to_json(&net);
        let back = parse_network(&text).into_result().unwrap().0;
        assert_eq!(*net, back);
    }
}

#[test]
fn placement_reproduces_the_shipped_rooftops() {
    let net = reference();
    let placed = place_rooftops(&net, &RooftopPlan::default()).unwrap();
    assert_eq!(placed.ibrs, net.ibrs);
    let shuffled = place_rooftops(&net, &RooftopPlan { seed: 7, ..RooftopPlan::default() }).unwrap();
    let again = place_rooftops(&net, &RooftopPlan { seed: 7, ..RooftopPlan::default() }).unwrap();
    assert_eq!(shuffled.ibrs, again.ibrs);
    assert_ne!(shuffled.ibrs, net.ibrs);
}

fn tiny() -> serde_json::Value {
    json!({
        "schema_version": "1", "s_base_mva": 10.0, "f_nominal_hz": 60.0,
        "buses": [{"id": "s", "base_kv_ll": 4.16}, {"id": "x", "base_kv_ll": 4.16}],
        "lines": [{"id": "l1", "from": "s", "to": "x", "length_km": 1.0,
                   "z1_ohm_per_km": [0.2, 0.4], "z0_ohm_per_km": [0.5, 1.2]}],
        "sources": [{"bus": "s", "z_internal_pu": [0.0, 0.01]}],
        "loads": [{"id": "xa", "bus": "x", "phase": "a", "p_kw": 10.0}],
        "ibrs": [{"id": "pv", "bus": "x", "phases": ["a"], "kind": "rooftop_pv", "s_rated_kva": 5.0, "p_set_kw": 5.0}]
    })
}

#[test]
fn dangling_bus_gives_one_located_diagnostic() {
    let mut doc = tiny();
    doc["ibrs"][0]["bus"] = json!("999");
    let parsed = parse_network(&doc.to_string());
    assert!(parsed.value.is_none());
    assert_eq!(parsed.diagnostics.len(), 1);
    let d = &parsed.diagnostics[0];
    assert_eq!(d.kind, DiagnosticKind::Reference);
    assert_eq!(d.path, "ibrs[0].bus");
}

#[test]
fn every_error_is_reported() {
    let mut doc = tiny();
    doc["lines"][0]["length_km"] = json!(-2.0);
    doc["loads"][0]["bus"] = json!("nowhere");
    doc["ibrs"][0]["frt_curve"] = json!("no_such_curve");
    doc["ibrs"][0]["s_rated_kva"] = json!(0.0);
    let parsed = parse_network(&doc.to_string());
    let paths: Vec<_> = parsed.diagnostics.iter().map(|d| d.path.as_str()).collect();
    for p in ["lines[0].length_km", "loads[0].bus", "ibrs[0].frt_curve", "ibrs[0].s_rated_kva"] {
        assert!(paths.contains(&p), "missing {p} in {paths:?}");
    }
}

#[test]
fn missing_file_is_an_io_diagnostic() {
    let err = load_network("/definitely/not/here.json").unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].kind, DiagnosticKind::Io);
}

#[test]
fn shipped_scenarios_load() {
    for name in ["sl2g_pcc.json", "sl2g_pcc_plr300.json", "l2l_gtf_vr.json"] {
        let sc = load_scenario(data("scenarios").join(name)).unwrap_or_else(|d| panic!("{name}: {d}"));
        assert!(!sc.label.is_empty());
    }
    let sc = load_scenario(data("scenarios/sl2g_pcc.json")).unwrap();
    assert_eq!(sc.label, "SL2G_PCC_plr50");
    assert_eq!(sc.fault.bus, "3");
    assert_eq!(sc.fault.t_on_s, 0.5);
    assert_eq!(sc.fault.duration_s, 0.25);
    assert!((sc.timeline.t_end_s - 1.75).abs() < 1e-12);
}

#[test]
fn scenario_errors_are_collected_with_paths() {
    let text = json!({
        "schema_version": "1",
        "network_path": "unused.json",
        "fault": {"kind": "SL2G", "bus": "nowhere", "phases": ["a", "b"]},
        "plr": -1.0,
        "engine": {"dt_s": 0.0},
        "ibr_overrides": [{"id": "ghost", "s_rated_kva": 1.0}]
    })
    .to_string();
    let file = parse_scenario_file(&text).unwrap();
    let parsed = resolve_scenario(&file, small());
    assert!(parsed.value.is_none());
    let paths: Vec<_> = parsed.diagnostics.iter().map(|d| d.path.as_str()).collect();
    for p in ["plr", "fault.bus", "fault.phases", "engine.dt_s", "ibr_overrides[0].id"] {
        assert!(paths.contains(&p), "missing {p} in {paths:?}");
    }
}

#[test]
fn unknown_scenario_field_is_a_schema_error() {
    let text = json!({"schema_version": "1", "network_path": "x.json",
                      "fault": {"kind": "SL2G", "bus": "PCC"}, "plr": 0.5, "speed": 3})
    .to_string();
    let err = parse_scenario_file(&text).unwrap_err();
    assert_eq!(err.0[0].kind, DiagnosticKind::Schema);
    assert!(err.0[0].path.contains("speed") || err.0[0].message.contains("speed"));
}

#[test]
fn excessive_plr_warns() {
    let text = json!({"schema_version": "1", "network_path": "x.json",
                      "fault": {"kind": "SL2G", "bus": "PCC"}, "plr": 5.0})
    .to_string();
    let file = parse_scenario_file(&text).unwrap();
    let (_, warnings) = resolve_scenario(&file, reference()).into_result().unwrap();
    assert!(warnings.iter().any(|w| w.message.contains("exceeds installed capacity")));
}
