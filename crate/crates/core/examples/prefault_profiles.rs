//! Pre-fault phase-a voltage along the main trunk for several PLR cases.
//!
//! ```text
//! cargo run --example prefault_profiles -- [network.json]
//! ```

use tdfault::engine::apply_plr;
use tdfault::ingest::load_network;
use tdfault::netmodel::Phase;
use tdfault::solver::{solve_prefault, SolveSettings};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee123_td.json").to_string());
    let net = load_network(&path).unwrap_or_else(|d| panic!("{d}"));
    let trunk = net.main_trunk();
    let dist = net.distances_from_head();
    let cases = [(0.0, false), (0.5, false), (0.5, true), (1.0, false), (3.0, false)];

    let mut header = format!("{:<8} {:>8}", "bus", "km");
    let mut columns = Vec::new();
    for (plr, vr) in cases {
        header.push_str(&format!(" {:>9}", format!("{}{}", plr, if vr { "vr" } else { "" })));
        let (dispatched, _) = apply_plr(&net, plr);
        let online = vec![true; dispatched.ibrs.len()];
        let pre = solve_prefault(&dispatched, vr, &online, &SolveSettings::default()).expect("pre-fault solve");
        let v: Vec<f64> = trunk
            .iter()
            .map(|&b| pre.ybus.index.row(b, Phase::A).map_or(f64::NAN, |r| pre.solution.voltages[r].norm()))
            .collect();
        columns.push(v);
    }
    println!("phase-a voltage (pu) along the main trunk");
    println!("{header}");
    for (k, &b) in trunk.iter().enumerate() {
        let mut line = format!("{:<8} {:>8.3}", net.buses[b].id, dist[b].unwrap_or(f64::NAN));
        for col in &columns {
            line.push_str(&format!(" {:>9.4}", col[k]));
        }
        println!("{line}");
    }
}
