use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::netmodel::{alpha, alpha2, to_sequence, Phase, PhaseSet, PhasorTriple};

/// Below this control-voltage magnitude (pu) an inverter injects its
/// clamped current at the last valid reference angle.
pub const CONTROL_VOLTAGE_FLOOR_PU: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IbrKind {
    PvFarm,
    Bess,
    RooftopPv,
}

impl IbrKind {
    pub fn is_pv(self) -> bool {
        matches!(self, IbrKind::PvFarm | IbrKind::RooftopPv)
    }
}

/// Row grouping of the trip table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripCategory {
    ThreePhase,
    PhaseA,
    PhaseB,
    PhaseC,
}

impl TripCategory {
    pub const ALL: [TripCategory; 4] = [
        TripCategory::ThreePhase,
        TripCategory::PhaseA,
        TripCategory::PhaseB,
        TripCategory::PhaseC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TripCategory::ThreePhase => "three_phase",
            TripCategory::PhaseA => "phase_a",
            TripCategory::PhaseB => "phase_b",
            TripCategory::PhaseC => "phase_c",
        }
    }
}

impl fmt::Display for TripCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid-following inverter-based resource.
#[derive(Debug, Clone, PartialEq)]
pub struct Ibr {
    pub id: String,
    pub bus: String,
    /// One phase, or all three.
    pub phases: PhaseSet,
    pub kind: IbrKind,
    pub s_rated_kva: f64,
    /// Dispatch; negative while a battery charges.
    pub p_set_kw: f64,
    pub q_set_kvar: f64,
    /// Current limit on the unit's own base.
    pub i_limit_pu: f64,
    pub frt_curve: String,
}

impl Ibr {
    pub const DEFAULT_ROOFTOP_I_LIMIT_PU: f64 = 2.0;
    pub const DEFAULT_PLANT_I_LIMIT_PU: f64 = 1.2;

    pub fn is_three_phase(&self) -> bool {
        self.phases.len() == 3
    }

    pub fn category(&self) -> TripCategory {
        if self.is_three_phase() {
            return TripCategory::ThreePhase;
        }
        match self.phases.iter().next() {
            Some(Phase::A) => TripCategory::PhaseA,
            Some(Phase::B) => TripCategory::PhaseB,
            _ => TripCategory::PhaseC,
        }
    }

    /// Setpoint on the unit's own base.
    pub fn s_set_own_pu(&self) -> Complex64 {
        Complex64::new(self.p_set_kw, self.q_set_kvar) / self.s_rated_kva
    }

    /// Factor converting own-base phase current to system per-unit current.
    pub fn system_current_scale(&self, s_base_mva: f64) -> f64 {
        3.0 * self.s_rated_kva / (self.phases.len() as f64 * s_base_mva * 1000.0)
    }
}

/// Injected currents (generator convention, own base) and the reference
/// angle the controller locked to.
#[derive(Debug, Clone, PartialEq)]
pub struct IbrOutput {
    pub currents: Vec<Complex64>,
    pub reference_angle: f64,
}

/// Grid-following current injection.
///
/// `v` holds terminal voltages for the unit's phases in a-b-c order. The
/// target magnitude `|S_set| / |V_ctrl|` is clamped to `i_limit_pu`; the
/// angle keeps the P/Q ratio relative to the control voltage. Three-phase
/// units regulate on the positive-sequence voltage and inject a balanced
/// positive-sequence set. Below the control floor the unit holds its
/// clamped current at `last_angle`.
pub fn ibr_injection(ibr: &Ibr, v: &[Complex64], last_angle: f64) -> IbrOutput {
    let angle = reference_angle(ibr, v, last_angle);
    IbrOutput {
        currents: ibr_injection_locked(ibr, v, angle),
        reference_angle: angle,
    }
}

/// Voltage the unit's controller acts on.
pub fn control_voltage(ibr: &Ibr, v: &[Complex64]) -> Complex64 {
    if ibr.is_three_phase() {
        to_sequence(&PhasorTriple::new(v[0], v[1], v[2])).positive
    } else {
        v[0]
    }
}

/// Angle of the control voltage, or `last_angle` when it is below the floor.
pub fn reference_angle(ibr: &Ibr, v: &[Complex64], last_angle: f64) -> f64 {
    let v_ctrl = control_voltage(ibr, v);
    if v_ctrl.norm() >= CONTROL_VOLTAGE_FLOOR_PU {
        v_ctrl.arg()
    } else {
        last_angle
    }
}

/// Injection with the phase reference held at `angle`; only the magnitude
/// responds to the terminal voltage.
pub fn ibr_injection_locked(ibr: &Ibr, v: &[Complex64], angle: f64) -> Vec<Complex64> {
    let s = ibr.s_set_own_pu();
    let v_mag = control_voltage(ibr, v).norm();
    let i_ref = if s.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let mag = if v_mag >= CONTROL_VOLTAGE_FLOOR_PU {
            (s.norm() / v_mag).min(ibr.i_limit_pu)
        } else {
            ibr.i_limit_pu
        };
        Complex64::from_polar(mag, angle - s.arg())
    };
    if ibr.is_three_phase() {
        vec![i_ref, i_ref * alpha2(), i_ref * alpha()]
    } else {
        vec![i_ref]
    }
}

/// Voltages an FRT curve is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrtVoltage {
    /// Applicable to undervoltage zones.
    pub under: f64,
    /// Applicable to overvoltage zones.
    pub over: f64,
}

impl From<f64> for FrtVoltage {
    fn from(v: f64) -> Self {
        Self { under: v, over: v }
    }
}

/// Single-phase units see their own phase magnitude; three-phase units are
/// judged by the lowest phase for undervoltage and the highest for
/// overvoltage.
pub fn ibr_voltage_for_frt(ibr: &Ibr, magnitudes: &[f64]) -> FrtVoltage {
    if ibr.is_three_phase() {
        FrtVoltage {
            under: magnitudes.iter().copied().fold(f64::INFINITY, f64::min),
            over: magnitudes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    } else {
        FrtVoltage::from(magnitudes[0])
    }
}
