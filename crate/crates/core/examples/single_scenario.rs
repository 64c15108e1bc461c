//! Run one scenario file and summarize trips, convergence and unbalance.
//!
//! ```text
//! cargo run --release --example single_scenario -- [scenario.json]
//! ```

use tdfault::engine::run_scenario;
use tdfault::ingest::load_scenario;
use tdfault::metrics::{default_vuf_window, max_vuf_over_window, trip_table};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/scenarios/sl2g_pcc.json").to_string());
    let sc = load_scenario(&path).unwrap_or_else(|d| panic!("{d}"));
    println!(
        "{}: {} at bus {} phases {:?}, t = {}..{} s, PLR {}{}",
        sc.label,
        sc.fault.kind,
        sc.fault.bus,
        sc.fault.phases.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
        sc.fault.t_on_s,
        sc.fault.t_clear_s(),
        sc.plr,
        if sc.voltage_regulation { " with regulation" } else { "" }
    );
    let r = run_scenario(&sc).unwrap_or_else(|e| panic!("{e}"));
    println!(
        "PV dispatch factor {:.3} ({:.0} kW of {:.0} kW installed)",
        r.dispatch.factor,
        r.dispatch.pv_output_kw(),
        r.dispatch.installed_pv_kw
    );
    println!(
        "{} samples, all converged: {}, max iterations {}",
        r.times.len(),
        r.all_converged(),
        r.log.iter().map(|s| s.iterations).max().unwrap_or(0)
    );
    for w in &r.warnings {
        println!("warning: {w}");
    }
    println!();
    for row in trip_table([&r]) {
        println!("{:<12} {:>3} / {:<3} {:>6.1} %", row.category.as_str(), row.n_tripped, row.n_total, row.pct);
    }
    let first = r.trips.iter().map(|t| t.trip_time_s).fold(f64::INFINITY, f64::min);
    if first.is_finite() {
        println!("first trip at {:.4} s ({:.4} s after onset)", first, first - r.t_on_s);
    }
    let report = max_vuf_over_window(&r, default_vuf_window(&r), false);
    println!(
        "post-fault max VUF {:.4} over {:.3}..{:.3} s",
        report.global_max.unwrap_or(f64::NAN),
        report.window_s.0,
        report.window_s.1
    );
}
