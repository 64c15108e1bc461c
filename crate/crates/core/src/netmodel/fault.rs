use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::Phase;
use super::ybus::YBus;
use super::NetError;
use super::NetworkModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultKind {
    #[serde(rename = "SL2G")]
    SingleLineToGround,
    #[serde(rename = "DL2G")]
    DoubleLineToGround,
    #[serde(rename = "L2L")]
    LineToLine,
    #[serde(rename = "3L2G")]
    ThreePhaseToGround,
}

impl FaultKind {
    pub const ALL: [FaultKind; 4] = [
        FaultKind::SingleLineToGround,
        FaultKind::DoubleLineToGround,
        FaultKind::LineToLine,
        FaultKind::ThreePhaseToGround,
    ];

    pub fn phase_count(self) -> usize {
        match self {
            FaultKind::SingleLineToGround => 1,
            FaultKind::DoubleLineToGround | FaultKind::LineToLine => 2,
            FaultKind::ThreePhaseToGround => 3,
        }
    }

    pub fn is_grounded(self) -> bool {
        self != FaultKind::LineToLine
    }

    /// Faulted phases used by the study matrix: a, a-b, a-b, a-b-c.
    pub fn default_phases(self) -> Vec<Phase> {
        Phase::ALL[..self.phase_count()].to_vec()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FaultKind::SingleLineToGround => "SL2G",
            FaultKind::DoubleLineToGround => "DL2G",
            FaultKind::LineToLine => "L2L",
            FaultKind::ThreePhaseToGround => "3L2G",
        }
    }

    pub fn parse(s: &str) -> Option<FaultKind> {
        FaultKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub bus: String,
    pub phases: Vec<Phase>,
    pub t_on_s: f64,
    pub duration_s: f64,
    pub y_fault_pu: f64,
}

/// Bolted-fault admittance, per-unit.
pub const DEFAULT_FAULT_ADMITTANCE_PU: f64 = 1e4;
/// 15 cycles at 60 Hz.
pub const DEFAULT_FAULT_DURATION_S: f64 = 0.25;

impl FaultSpec {
    pub fn new(kind: FaultKind, bus: impl Into<String>, phases: Vec<Phase>) -> Self {
        Self {
            kind,
            bus: bus.into(),
            phases,
            t_on_s: 0.5,
            duration_s: DEFAULT_FAULT_DURATION_S,
            y_fault_pu: DEFAULT_FAULT_ADMITTANCE_PU,
        }
    }

    pub fn t_clear_s(&self) -> f64 {
        self.t_on_s + self.duration_s
    }

    /// Check the kind/phase-count pairing and the timing fields.
    pub fn validate(&self) -> Result<(), NetError> {
        let mut distinct = self.phases.clone();
        distinct.sort();
        distinct.dedup();
        if self.phases.len() != self.kind.phase_count() || distinct.len() != self.phases.len() {
            return Err(NetError::KindPhaseMismatch {
                kind: self.kind,
                phases: self.phases.len(),
            });
        }
        if !(self.duration_s > 0.0) {
            return Err(NetError::InvalidModel("fault duration_s must be positive".into()));
        }
        if !(self.y_fault_pu > 0.0) || !self.y_fault_pu.is_finite() {
            return Err(NetError::InvalidModel("fault y_fault_pu must be positive".into()));
        }
        Ok(())
    }
}

/// Return a copy of `y` with the fault admittance added.
///
/// Grounded kinds add `y_fault` on the diagonal of each faulted phase; a
/// line-to-line fault adds `y_fault · [[1, −1], [−1, 1]]` across the two
/// phases and has no path to ground.
pub fn stamp_fault(y: &YBus, net: &NetworkModel, f: &FaultSpec) -> Result<YBus, NetError> {
    let bi = net.bus_idx(&f.bus).ok_or_else(|| NetError::UnknownBus(f.bus.clone()))?;
    let rows = f
        .phases
        .iter()
        .map(|p| {
            y.index.row(bi, *p).ok_or_else(|| NetError::PhaseMismatch {
                bus: f.bus.clone(),
                phases: p.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let yf = Complex64::new(f.y_fault_pu, 0.0);
    let mut out = y.clone();
    if f.kind.is_grounded() {
        for r in rows {
            out.matrix.add(r, r, yf);
        }
    } else {
        let (p, q) = (rows[0], rows[1]);
        out.matrix.add(p, p, yf);
        out.matrix.add(q, q, yf);
        out.matrix.add(p, q, -yf);
        out.matrix.add(q, p, -yf);
    }
    Ok(out)
}
