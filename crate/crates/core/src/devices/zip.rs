use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::netmodel::Phase;

/// Below this terminal voltage (pu) the constant-current and constant-power
/// shares of a ZIP load are evaluated as the constant impedances that draw
/// the same current at the floor voltage.
pub const CONSTANT_POWER_FLOOR_PU: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZipCoefficients {
    pub z: f64,
    pub i: f64,
    pub p: f64,
}

impl Default for ZipCoefficients {
    fn default() -> Self {
        Self { z: 0.4, i: 0.3, p: 0.3 }
    }
}

impl ZipCoefficients {
    pub fn new(z: f64, i: f64, p: f64) -> Self {
        Self { z, i, p }
    }

    pub fn is_valid(&self) -> bool {
        self.z >= 0.0 && self.i >= 0.0 && self.p >= 0.0 && (self.z + self.i + self.p - 1.0).abs() <= 1e-9
    }
}

/// Single-phase, wye-connected ZIP load.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipLoad {
    pub id: String,
    pub bus: String,
    pub phase: Phase,
    /// Complex power at nominal voltage, kVA.
    pub s_nominal_kva: Complex64,
    pub coeffs: ZipCoefficients,
    pub v_nominal_pu: f64,
}

impl ZipLoad {
    /// Admittance realizing the constant-impedance share, for stamping.
    pub fn constant_impedance_admittance(&self, s_pu: Complex64) -> Complex64 {
        (s_pu * self.coeffs.z).conj() / (self.v_nominal_pu * self.v_nominal_pu)
    }

    /// Current drawn by the constant-current and constant-power shares.
    pub fn nonlinear_current(&self, s_pu: Complex64, v: Complex64) -> Complex64 {
        let mag = v.norm();
        if mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let i_part = (s_pu * self.coeffs.i).conj() * v / (self.v_nominal_pu * mag.max(CONSTANT_POWER_FLOOR_PU));
        let sp = s_pu * self.coeffs.p;
        let p_part = if mag >= CONSTANT_POWER_FLOOR_PU {
            (sp / v).conj()
        } else {
            sp.conj() * v / (CONSTANT_POWER_FLOOR_PU * CONSTANT_POWER_FLOOR_PU)
        };
        i_part + p_part
    }
}

/// Current drawn (load convention) by a ZIP load with per-unit nominal power
/// `s_pu` at terminal voltage `v`.
pub fn zip_injection(load: &ZipLoad, s_pu: Complex64, v: Complex64) -> Complex64 {
    load.constant_impedance_admittance(s_pu) * v + load.nonlinear_current(s_pu, v)
}
