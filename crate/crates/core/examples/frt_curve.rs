//! Trip times of the default ride-through curve under constant voltages.
//!
//! ```text
//! cargo run --example frt_curve
//! ```

use tdfault::devices::{frt_step, FrtCurve, FrtStatus};

fn trip_time(curve: &FrtCurve, v: f64, dt: f64, horizon: f64) -> Option<(f64, String)> {
    let mut state = curve.initial_state();
    let steps = (horizon / dt).round() as usize;
    for k in 1..=steps {
        let t = k as f64 * dt;
        state = frt_step(curve, &state, v, 60.0, dt, t);
        if state.status == FrtStatus::Tripped {
            let cause = state.trip_cause.expect("tripped state has a cause");
            return Some((t, cause.zone.to_string()));
        }
    }
    None
}

fn main() {
    let curve = FrtCurve::default_1547();
    let dt = 1.0 / 60.0;
    println!("under-voltage zones:");
    for z in &curve.under_voltage_zones {
        println!("  [{:.2}, {}) pu for {} s", z.v_low_pu, z.v_high_pu.map_or("inf".into(), |x| format!("{x:.2}")), z.max_duration_s);
    }
    println!("over-voltage zones:");
    for z in &curve.over_voltage_zones {
        println!("  [{:.2}, {}) pu for {} s", z.v_low_pu, z.v_high_pu.map_or("inf".into(), |x| format!("{x:.2}")), z.max_duration_s);
    }
    println!();
    println!("{:>8}  {:>12}  zone", "v (pu)", "trip (s)");
    for v in [0.0, 0.1, 0.3, 0.44, 0.46, 0.6, 0.8, 0.9, 1.0, 1.05, 1.15, 1.25] {
        match trip_time(&curve, v, dt, 15.0) {
            Some((t, zone)) => println!("{v:>8.2}  {t:>12.4}  {zone}"),
            None => println!("{v:>8.2}  {:>12}  -", "rides through"),
        }
    }
}
