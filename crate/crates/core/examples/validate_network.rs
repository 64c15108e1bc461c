//! Validate a network file and print every finding with its location.
//!
//! Without an argument, the shipped feeder is validated and then a broken
//! copy of it, to show how several problems are reported together.
//!
//! ```text
//! cargo run --example validate_network -- [network.json]
//! ```

use tdfault::ingest::parse_network;

fn check(name: &str, text: &str) {
    let parsed = parse_network(text);
    let errors = parsed.diagnostics.iter().filter(|d| d.is_error()).count();
    println!("{name}: {} finding(s), {errors} error(s)", parsed.diagnostics.len());
    for d in &parsed.diagnostics {
        println!("  {d}");
    }
    if let Some(net) = parsed.value {
        println!(
            "  {} buses, {} lines, {} transformers, {} loads, {} IBRs",
            net.buses.len(),
            net.lines.len(),
            net.transformers.len(),
            net.loads.len(),
            net.ibrs.len()
        );
    }
}

fn main() {
    if let Some(path) = std::env::args().nth(1) {
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"));
        check(&path, &text);
        return;
    }
    let text = include_str!("../data/feeder13_td.json");
    check("feeder13_td.json", text);

    let mut doc: serde_json::Value = serde_json::from_str(text).expect("shipped file is JSON");
    doc["ibrs"][0]["bus"] = "999".into();
    doc["lines"][0]["length_km"] = (-1.0).into();
    doc["loads"][0]["zip"] = serde_json::json!({ "z": 0.5, "i": 0.5, "p": 0.5 });
    check("broken copy", &doc.to_string());
}
