//! Spread equal rooftop PV units over a feeder's load points.
//!
//! ```text
//! cargo run --example place_rooftops -- <network.json> [count] [total_kw] [seed] [out.json]
//! ```
//!
//! Without an output path the network file is rewritten in place.

use std::process::ExitCode;

use tdfault::devices::IbrKind;
use tdfault::ingest::{load_network, place_rooftops, write_network, RooftopPlan};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(path) = args.first() else {
        eprintln!("usage: place_rooftops <network.json> [count] [total_kw] [seed] [out.json]");
        return ExitCode::from(2);
    };
    let mut plan = RooftopPlan::default();
    if let Some(n) = args.get(1) {
        plan.count = n.parse().expect("count must be an integer");
    }
    if let Some(kw) = args.get(2) {
        plan.total_kw = kw.parse().expect("total_kw must be a number");
    }
    if let Some(seed) = args.get(3) {
        plan.seed = seed.parse().expect("seed must be an integer");
    }
    let out = args.get(4).unwrap_or(path);

    let net = match load_network(path) {
        Ok(n) => n,
        Err(d) => {
            eprintln!("{d}");
            return ExitCode::FAILURE;
        }
    };
    let placed = match place_rooftops(&net, &plan) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let mut per_phase = [0usize; 3];
    for u in placed.ibrs.iter().filter(|u| u.kind == IbrKind::RooftopPv) {
        for p in u.phases.iter() {
            per_phase[p.index()] += 1;
        }
    }
    println!(
        "{} rooftop units of {:.2} kW (a/b/c: {}/{}/{})",
        plan.count,
        plan.total_kw / plan.count as f64,
        per_phase[0],
        per_phase[1],
        per_phase[2]
    );
    if let Err(e) = write_network(&placed, out) {
        eprintln!("cannot write {out}: {e}");
        return ExitCode::FAILURE;
    }
    println!("wrote {out}");
    ExitCode::SUCCESS
}
