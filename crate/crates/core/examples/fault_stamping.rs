//! Stamp each fault kind at a bus and look at the faulted-bus voltages.
//!
//! All inverters are held offline so the numbers reflect the network alone.
//!
//! ```text
//! cargo run --example fault_stamping -- [network.json] [location]
//! ```

use tdfault::ingest::load_network;
use tdfault::netmodel::{build_ybus, stamp_fault, FaultKind, FaultSpec, Phase};
use tdfault::solver::{solve, SolveError, SolveSettings};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee123_td.json").to_string());
    let location = args.get(1).map_or("PCC", String::as_str);

    let net = load_network(&path).unwrap_or_else(|d| panic!("{d}"));
    let bus = net.resolve_location(location).expect("known location").to_string();
    let bi = net.bus_idx(&bus).expect("resolved bus");
    let healthy = build_ybus(&net).expect("energized network");
    let offline = vec![false; net.ibrs.len()];
    let settings = SolveSettings::default();

    println!("faults at {location} (bus {bus}), |V| in pu");
    println!("{:<6} {:>8} {:>8} {:>8}  iterations", "kind", "a", "b", "c");
    let pre = solve(&healthy, &net, &offline, &settings).expect("pre-fault solve");
    let row = |v: &[tdfault::Complex64], p: Phase| healthy.index.row(bi, p).map_or(f64::NAN, |r| v[r].norm());
    println!(
        "{:<6} {:>8.4} {:>8.4} {:>8.4}  {}",
        "none",
        row(&pre.voltages, Phase::A),
        row(&pre.voltages, Phase::B),
        row(&pre.voltages, Phase::C),
        pre.iterations
    );
    for kind in FaultKind::ALL {
        let fault = FaultSpec::new(kind, bus.clone(), kind.default_phases());
        let y = stamp_fault(&healthy, &net, &fault).expect("faultable bus");
        let sol = match solve(&y, &net, &offline, &settings) {
            Ok(s) => s,
            Err(SolveError::NotConverged(best)) => *best,
            Err(e) => panic!("{e}"),
        };
        println!(
            "{:<6} {:>8.4} {:>8.4} {:>8.4}  {}",
            kind.as_str(),
            row(&sol.voltages, Phase::A),
            row(&sol.voltages, Phase::B),
            row(&sol.voltages, Phase::C),
            sol.iterations
        );
    }
}
