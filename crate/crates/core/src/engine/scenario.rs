use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::netmodel::{FaultSpec, NetworkModel};
use crate::solver::SolveSettings;

pub const DEFAULT_DT_S: f64 = 1.0 / 60.0;
pub const DEFAULT_T_PRE_S: f64 = 0.5;
/// Simulated time kept after fault clearing.
pub const DEFAULT_POST_CLEAR_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub dt_s: f64,
    /// Fault onset time when the fault does not set its own.
    pub t_pre_s: f64,
    pub t_end_s: f64,
}

impl Timeline {
    /// Default grid around a fault clearing at `t_clear_s`.
    pub fn around(t_clear_s: f64) -> Self {
        Self {
            dt_s: DEFAULT_DT_S,
            t_pre_s: DEFAULT_T_PRE_S,
            t_end_s: t_clear_s + DEFAULT_POST_CLEAR_S,
        }
    }
}

/// Piecewise-linear frequency trace `(t_s, f_hz)`, held constant outside
/// its span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace(pub Vec<(f64, f64)>);

impl FrequencyTrace {
    pub fn at(&self, t: f64) -> f64 {
        let pts = &self.0;
        match pts.iter().position(|&(tk, _)| tk > t) {
            None => pts.last().map_or(f64::NAN, |p| p.1),
            Some(0) => pts[0].1,
            Some(k) => {
                let (t0, f0) = pts[k - 1];
                let (t1, f1) = pts[k];
                f0 + (f1 - f0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub directory: Option<PathBuf>,
    pub profile_snapshot_times_s: Vec<f64>,
}

/// A network, one fault, a PLR case and the run settings.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub network: Arc<NetworkModel>,
    pub fault: FaultSpec,
    /// PV output over effective load, as a ratio.
    pub plr: f64,
    pub voltage_regulation: bool,
    pub solver: SolveSettings,
    pub timeline: Timeline,
    pub frequency_trace: Option<FrequencyTrace>,
    pub outputs: OutputSettings,
}

impl Scenario {
    /// Scenario with default settings; the fault keeps its own timing.
    pub fn new(network: Arc<NetworkModel>, fault: FaultSpec, plr: f64, voltage_regulation: bool) -> Self {
        let timeline = Timeline {
            t_pre_s: fault.t_on_s,
            ..Timeline::around(fault.t_clear_s())
        };
        let mut sc = Self {
            label: String::new(),
            network,
            fault,
            plr,
            voltage_regulation,
            solver: SolveSettings::default(),
            timeline,
            frequency_trace: None,
            outputs: OutputSettings::default(),
        };
        sc.label = sc.default_label();
        sc
    }

    /// `<kind>_<bus>_plr<percent>[_vr]`, e.g. `SL2G_3_plr50_vr`.
    pub fn default_label(&self) -> String {
        let loc = self
            .network
            .fault_locations
            .iter()
            .find(|l| l.bus == self.fault.bus)
            .map_or(self.fault.bus.as_str(), |l| l.name.as_str());
        format!(
            "{}_{}_plr{}{}",
            self.fault.kind,
            loc,
            plr_percent(self.plr),
            if self.voltage_regulation { "_vr" } else { "" }
        )
    }

    pub fn frequency_at(&self, t: f64) -> f64 {
        self.frequency_trace
            .as_ref()
            .map_or(self.network.f_nominal_hz, |tr| tr.at(t))
    }
}

/// PLR as a whole-number percentage string where exact, else decimal.
pub fn plr_percent(plr: f64) -> String {
    let pct = plr * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}
