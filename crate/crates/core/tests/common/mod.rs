#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use tdfault::devices::TripCategory;
use tdfault::engine::{run_scenario, Scenario, SimulationResult};
use tdfault::ingest::load_network;
use tdfault::metrics::trip_table;
use tdfault::netmodel::{FaultKind, FaultSpec, NetworkModel, Phase};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn reference() -> Arc<NetworkModel> {
    static NET: OnceLock<Arc<NetworkModel>> = OnceLock::new();
    NET.get_or_init(|| Arc::new(load_network(data("ieee123_td.json")).expect("reference network loads")))
        .clone()
}

pub fn small() -> Arc<NetworkModel> {
    static NET: OnceLock<Arc<NetworkModel>> = OnceLock::new();
    NET.get_or_init(|| Arc::new(load_network(data("feeder13_td.json")).expect("small network loads")))
        .clone()
}

pub fn scenario(net: &Arc<NetworkModel>, kind: FaultKind, location: &str, plr: f64, vr: bool) -> Scenario {
    let bus = net.resolve_location(location).expect("known location").to_string();
    Scenario::new(net.clone(), FaultSpec::new(kind, bus, kind.default_phases()), plr, vr)
}

pub fn run(net: &Arc<NetworkModel>, kind: FaultKind, location: &str, plr: f64, vr: bool) -> SimulationResult {
    run_scenario(&scenario(net, kind, location, plr, vr)).expect("scenario runs")
}

pub fn pct(r: &SimulationResult, cat: TripCategory) -> f64 {
    trip_table([r])
        .into_iter()
        .find(|row| row.category == cat)
        .map_or(0.0, |row| row.pct)
}

pub fn pcts(r: &SimulationResult) -> [f64; 4] {
    TripCategory::ALL.map(|c| pct(r, c))
}

/// |V| of `bus` phase `p` at sample `k`.
pub fn vmag(r: &SimulationResult, k: usize, bus: &str, p: Phase) -> f64 {
    let bi = r.network.bus_idx(bus).expect("known bus");
    let row = r.index.row(bi, p).expect("phase present");
    r.voltages[k][row].norm()
}

/// Samples whose step lies inside the fault.
pub fn fault_samples(r: &SimulationResult) -> Vec<usize> {
    r.log
        .iter()
        .enumerate()
        .filter(|(_, s)| s.stage == tdfault::engine::StepStage::Fault)
        .map(|(k, _)| k)
        .collect()
}
