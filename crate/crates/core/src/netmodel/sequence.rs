//! Symmetrical-component transforms.
//!
//! Phase frame `(a, b, c)` and sequence frame `(0, 1, 2)` are related by
//! `V_abc = A · V_012` with
//!
//! ```text
//!     | 1  1   1  |
//! A = | 1  α²  α  |      α = 1∠120°
//!     | 1  α   α² |
//! ```

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Matrix3c = Matrix3<Complex64>;

/// `1∠120°`
pub fn alpha() -> Complex64 {
    Complex64::new(-0.5, 3f64.sqrt() / 2.0)
}

/// `1∠240°`
pub fn alpha2() -> Complex64 {
    Complex64::new(-0.5, -(3f64.sqrt()) / 2.0)
}

/// Phasors in the phase frame, per-unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasorTriple {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

/// Phasors in the sequence frame, per-unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceTriple {
    pub zero: Complex64,
    pub positive: Complex64,
    pub negative: Complex64,
}

impl PhasorTriple {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { a, b, c }
    }

    /// Balanced positive-sequence set with phase `a` at `v`.
    pub fn balanced(v: Complex64) -> Self {
        Self::new(v, v * alpha2(), v * alpha())
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn magnitudes(&self) -> [f64; 3] {
        [self.a.norm(), self.b.norm(), self.c.norm()]
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.a * k, self.b * k, self.c * k)
    }
}

impl From<[Complex64; 3]> for PhasorTriple {
    fn from(v: [Complex64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

pub fn to_sequence(v: &PhasorTriple) -> SequenceTriple {
    let (al, al2) = (alpha(), alpha2());
    SequenceTriple {
        zero: (v.a + v.b + v.c) / 3.0,
        positive: (v.a + al * v.b + al2 * v.c) / 3.0,
        negative: (v.a + al2 * v.b + al * v.c) / 3.0,
    }
}

pub fn from_sequence(s: &SequenceTriple) -> PhasorTriple {
    let (al, al2) = (alpha(), alpha2());
    PhasorTriple {
        a: s.zero + s.positive + s.negative,
        b: s.zero + al2 * s.positive + al * s.negative,
        c: s.zero + al * s.positive + al2 * s.negative,
    }
}

/// The symmetrical-components matrix `A`.
pub fn components_matrix() -> Matrix3c {
    let one = Complex64::new(1.0, 0.0);
    let (al, al2) = (alpha(), alpha2());
    Matrix3c::new(one, one, one, one, al2, al, one, al, al2)
}

/// `A⁻¹ = conj(A) / 3`.
pub fn components_matrix_inverse() -> Matrix3c {
    components_matrix().map(|z| z.conj() / 3.0)
}

/// Phase-frame impedance of a transposed line from its sequence impedances
/// (negative sequence equal to positive).
pub fn seq_to_phase_impedance(z1: Complex64, z0: Complex64) -> Matrix3c {
    let zs = (z0 + 2.0 * z1) / 3.0;
    let zm = (z0 - z1) / 3.0;
    Matrix3c::from_fn(|i, j| if i == j { zs } else { zm })
}
