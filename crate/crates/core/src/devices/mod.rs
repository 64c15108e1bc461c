//! Bus-attached device models and the fault-ride-through state machine.

mod frt;
mod ibr;
mod regulator;
mod zip;

use serde::{Deserialize, Serialize};

pub use frt::{
    frt_step, ContinuousRegion, FrequencyZone, FrtCurve, FrtState, FrtStatus, TripCause,
    VoltageZone, ZoneId,
};
pub use ibr::{
    control_voltage, ibr_injection, ibr_injection_locked, ibr_voltage_for_frt, reference_angle,
    FrtVoltage, Ibr, IbrKind, IbrOutput, TripCategory, CONTROL_VOLTAGE_FLOOR_PU,
};
pub use regulator::{regulator_control, step_tap, Regulator, RegulatorTaps};
pub use zip::{zip_injection, ZipCoefficients, ZipLoad, CONSTANT_POWER_FLOOR_PU};

use crate::netmodel::PhaseSet;

/// Switched shunt capacitor bank, wye-grounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuntCapacitor {
    pub id: String,
    pub bus: String,
    pub phases: PhaseSet,
    /// Per phase at 1 pu voltage.
    pub q_rated_kvar: f64,
    pub enabled: bool,
}
