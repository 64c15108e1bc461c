//! Symmetrical components of a few phasor sets, and their unbalance factor.
//!
//! ```text
//! cargo run --example sequence_components
//! ```

use tdfault::metrics::vuf;
use tdfault::netmodel::{from_sequence, to_sequence, PhasorTriple};
use tdfault::Complex64;

fn polar(m: f64, deg: f64) -> Complex64 {
    Complex64::from_polar(m, deg.to_radians())
}

fn show(name: &str, v: PhasorTriple) {
    let s = to_sequence(&v);
    let back = from_sequence(&s);
    let err = (back.a - v.a).norm().max((back.b - v.b).norm()).max((back.c - v.c).norm());
    println!(
        "{name:<28} |V0| {:.4}  |V1| {:.4}  |V2| {:.4}  VUF {}  round-trip {err:.1e}",
        s.zero.norm(),
        s.positive.norm(),
        s.negative.norm(),
        vuf(&v).map_or("undefined".to_string(), |x| format!("{x:.4}")),
    );
}

fn main() {
    show("balanced", PhasorTriple::balanced(polar(1.0, 0.0)));
    show("phase a sagged to 0.5", PhasorTriple::new(polar(0.5, 0.0), polar(1.0, -120.0), polar(1.0, 120.0)));
    show("phase a collapsed", PhasorTriple::new(polar(0.0, 0.0), polar(1.0, -120.0), polar(1.0, 120.0)));
    show("a-b shorted (L2L)", PhasorTriple::new(polar(0.5, -60.0), polar(0.5, -60.0), polar(1.0, 120.0)));
    show("negative sequence only", PhasorTriple::new(polar(1.0, 0.0), polar(1.0, 120.0), polar(1.0, -120.0)));
    show("zero everywhere", PhasorTriple::balanced(Complex64::new(0.0, 0.0)));
}
