//! Post-fault voltage unbalance across the feeder after a single
//! line-to-ground fault at the PCC, for each PLR case.
//!
//! ```text
//! cargo run --release --example vuf_report -- [network.json]
//! ```

use std::sync::Arc;

use tdfault::engine::{run_scenario, PlrCase, Scenario};
use tdfault::ingest::load_network;
use tdfault::metrics::{default_vuf_window, max_vuf_over_window, VUF_LIMIT};
use tdfault::netmodel::{FaultKind, FaultSpec};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee123_td.json").to_string());
    let net = Arc::new(load_network(&path).unwrap_or_else(|d| panic!("{d}")));
    let pcc = net.resolve_location("PCC").expect("PCC location").to_string();
    let kind = FaultKind::SingleLineToGround;

    println!("limit {VUF_LIMIT}");
    for case in PlrCase::standard() {
        let sc = Scenario::new(
            net.clone(),
            FaultSpec::new(kind, pcc.clone(), kind.default_phases()),
            case.plr,
            case.voltage_regulation,
        );
        let r = run_scenario(&sc).unwrap_or_else(|e| panic!("{e}"));
        let report = max_vuf_over_window(&r, default_vuf_window(&r), false);
        let mut worst: Vec<_> = report.nodes.iter().filter_map(|n| n.max_vuf.map(|v| (v, &n.node))).collect();
        worst.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        let above = report.nodes.iter().filter(|n| n.exceeds_limit).count();
        println!(
            "\n{}: global max {:.4} ({}), {above} of {} nodes above the limit",
            sc.label,
            report.global_max.unwrap_or(f64::NAN),
            if report.exceeds_limit() { "exceeds" } else { "within" },
            report.nodes.len()
        );
        for (v, node) in worst.iter().take(5) {
            println!("  {node:<6} {v:.4}");
        }
    }
}
