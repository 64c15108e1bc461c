use serde::{Deserialize, Serialize};

use crate::netmodel::{BusPhaseIndex, NetworkModel, PhaseSet};
use num_complex::Complex64;

/// Per-phase step-voltage regulator at the sending end of a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regulator {
    pub id: String,
    pub from: String,
    pub to: String,
    pub phases: PhaseSet,
    pub step_pu: f64,
    pub tap_range: i32,
    pub band_center_pu: f64,
    pub band_width_pu: f64,
    /// Initial taps, indexed by phase.
    pub taps: [i32; 3],
}

impl Regulator {
    pub const DEFAULT_STEP_PU: f64 = 0.00625;
    pub const DEFAULT_TAP_RANGE: i32 = 16;
    pub const DEFAULT_BAND_CENTER_PU: f64 = 1.0;
    /// 2 V either side of 120 V.
    pub const DEFAULT_BAND_WIDTH_PU: f64 = 2.0 * 2.0 / 120.0;

    pub fn ratio(&self, tap: i32) -> f64 {
        1.0 + tap.clamp(-self.tap_range, self.tap_range) as f64 * self.step_pu
    }
}

/// Tap positions for every regulator of a network, by regulator index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RegulatorTaps(pub Vec<[i32; 3]>);

impl RegulatorTaps {
    pub fn from_network(net: &NetworkModel) -> Self {
        Self(net.regulators.iter().map(|r| r.taps).collect())
    }

    pub fn get(&self, i: usize) -> [i32; 3] {
        self.0.get(i).copied().unwrap_or([0; 3])
    }
}

/// One control pass: each regulated phase whose downstream voltage is
/// outside the band moves one step toward it. Returns whether any tap moved.
pub fn regulator_control(
    net: &NetworkModel,
    index: &BusPhaseIndex,
    voltages: &[Complex64],
    taps: &mut RegulatorTaps,
) -> bool {
    let mut changed = false;
    if taps.0.len() < net.regulators.len() {
        taps.0.resize(net.regulators.len(), [0; 3]);
    }
    for (ri, reg) in net.regulators.iter().enumerate() {
        let Some(bi) = net.bus_idx(&reg.to) else { continue };
        for p in reg.phases.iter() {
            let Some(row) = index.row(bi, p) else { continue };
            let v = voltages[row].norm();
            let tap = &mut taps.0[ri][p.index()];
            let next = step_tap(reg, *tap, v);
            if next != *tap {
                *tap = next;
                changed = true;
            }
        }
    }
    changed
}

/// Next tap for a regulated voltage `v`, saturating at the tap range.
pub fn step_tap(reg: &Regulator, tap: i32, v: f64) -> i32 {
    let lo = reg.band_center_pu - reg.band_width_pu / 2.0;
    let hi = reg.band_center_pu + reg.band_width_pu / 2.0;
    let next = if v < lo {
        tap + 1
    } else if v > hi {
        tap - 1
    } else {
        tap
    };
    next.clamp(-reg.tap_range, reg.tap_range)
}
