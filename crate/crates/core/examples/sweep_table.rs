//! Trip percentages for a fault-kind × location × PLR matrix, laid out as
//! one row per fault case and one column group per PLR case.
//!
//! ```text
//! cargo run --release --example sweep_table -- [network.json] [kinds] [jobs]
//! ```
//!
//! `kinds` is a comma-separated list such as `SL2G,L2L`; the default is all four.

use std::sync::Arc;

use tdfault::devices::TripCategory;
use tdfault::engine::{run_sweep, Scenario, SweepMatrix};
use tdfault::ingest::load_network;
use tdfault::metrics::trip_table;
use tdfault::netmodel::{FaultKind, FaultSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee123_td.json").to_string());
    let mut matrix = SweepMatrix::standard();
    if let Some(kinds) = args.get(1) {
        matrix.kinds = kinds.split(',').map(|k| FaultKind::parse(k).expect("fault kind")).collect();
    }
    let jobs = args.get(2).map_or(1, |j| j.parse().expect("jobs"));

    let net = Arc::new(load_network(&path).unwrap_or_else(|d| panic!("{d}")));
    let pcc = net.resolve_location("PCC").expect("PCC location").to_string();
    let base = Scenario::new(
        net,
        FaultSpec::new(FaultKind::SingleLineToGround, pcc, FaultKind::SingleLineToGround.default_phases()),
        0.5,
        false,
    );
    let started = std::time::Instant::now();
    let outcomes = run_sweep(&base, &matrix, jobs);
    let elapsed = started.elapsed();

    let cats = TripCategory::ALL;
    let mut header = format!("{:<12}", "case");
    for c in &matrix.plr_cases {
        header.push_str(&format!(" | {:^23}", format!("PLR {c}")));
    }
    println!("{header}");
    let mut sub = format!("{:<12}", "");
    for _ in &matrix.plr_cases {
        sub.push_str(" |   3φ    a     b     c");
    }
    println!("{sub}");
    let per_row = matrix.plr_cases.len();
    for chunk in outcomes.chunks(per_row) {
        let mut line = format!("{:<12}", format!("{} {}", chunk[0].cell.kind, chunk[0].cell.location));
        for o in chunk {
            match &o.result {
                Ok(r) => {
                    let rows = trip_table([r]);
                    line.push_str(" |");
                    for c in cats {
                        let pct = rows.iter().find(|x| x.category == c).map_or(0.0, |x| x.pct);
                        line.push_str(&format!(" {pct:>5.1}"));
                    }
                }
                Err(e) => line.push_str(&format!(" | {:^23}", format!("failed: {e}"))),
            }
        }
        println!("{line}");
    }
    println!("\n{} cells in {:.1} s", outcomes.len(), elapsed.as_secs_f64());
}
