use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_scenario, EngineError, SimulationResult};
use super::scenario::{plr_percent, Scenario};
use crate::netmodel::FaultKind;

/// Fault locations in reporting order.
pub const STANDARD_LOCATIONS: [&str; 5] = ["PCC", "SHORT", "MEDIUM", "FAR", "GTF"];

/// One PLR column: a ratio and whether regulation is in service.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlrCase {
    pub plr: f64,
    pub voltage_regulation: bool,
}

impl PlrCase {
    pub const fn new(plr: f64, voltage_regulation: bool) -> Self {
        Self { plr, voltage_regulation }
    }

    /// 50 %, 50 % with regulation, 100 %, 300 %.
    pub fn standard() -> Vec<PlrCase> {
        vec![
            PlrCase::new(0.5, false),
            PlrCase::new(0.5, true),
            PlrCase::new(1.0, false),
            PlrCase::new(3.0, false),
        ]
    }
}

impl fmt::Display for PlrCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.plr)?;
        if self.voltage_regulation {
            f.write_str("vr")?;
        }
        Ok(())
    }
}

impl FromStr for PlrCase {
    type Err = String;

    /// `0.5`, `0.5vr`, `50%` or `50%vr`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let (num, vr) = match t.strip_suffix("vr") {
            Some(rest) => (rest.trim_end(), true),
            None => (t.as_str(), false),
        };
        let plr = match num.strip_suffix('%') {
            Some(p) => p.parse::<f64>().map(|x| x / 100.0),
            None => num.parse::<f64>(),
        }
        .map_err(|_| format!("invalid PLR case \"{s}\""))?;
        if !(plr >= 0.0) || !plr.is_finite() {
            return Err(format!("PLR must be non-negative: \"{s}\""));
        }
        Ok(PlrCase::new(plr, vr))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMatrix {
    pub kinds: Vec<FaultKind>,
    /// Location names or bus ids.
    pub locations: Vec<String>,
    pub plr_cases: Vec<PlrCase>,
}

impl SweepMatrix {
    /// Four fault kinds × five locations × four PLR cases.
    pub fn standard() -> Self {
        Self {
            kinds: FaultKind::ALL.to_vec(),
            locations: STANDARD_LOCATIONS.iter().map(|s| s.to_string()).collect(),
            plr_cases: PlrCase::standard(),
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len() * self.locations.len() * self.plr_cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in kind-major, then location, then PLR order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.len());
        for &kind in &self.kinds {
            for loc in &self.locations {
                for &case in &self.plr_cases {
                    out.push(SweepCell {
                        kind,
                        location: loc.clone(),
                        case,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kind: FaultKind,
    pub location: String,
    pub case: PlrCase,
}

impl SweepCell {
    pub fn label(&self) -> String {
        format!(
            "{}_{}_plr{}{}",
            self.kind,
            self.location,
            plr_percent(self.case.plr),
            if self.case.voltage_regulation { "_vr" } else { "" }
        )
    }

    /// The base scenario with this cell's fault and PLR case. The fault
    /// keeps the base timing and admittance; phases take the kind's default.
    pub fn scenario(&self, base: &Scenario) -> Result<Scenario, EngineError> {
        let bus = base
            .network
            .resolve_location(&self.location)
            .ok_or_else(|| crate::netmodel::NetError::UnknownBus(self.location.clone()))?
            .to_string();
        let mut sc = base.clone();
        sc.fault.kind = self.kind;
        sc.fault.bus = bus;
        sc.fault.phases = self.kind.default_phases();
        sc.fault.validate()?;
        sc.plr = self.case.plr;
        sc.voltage_regulation = self.case.voltage_regulation;
        sc.label = self.label();
        Ok(sc)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub cell: SweepCell,
    pub result: Result<SimulationResult, EngineError>,
}

/// Run every cell of `matrix` on the base scenario's network and settings.
///
/// Cells are independent; with `jobs > 1` they run concurrently. Results
/// come back in cell order whatever the completion order, and a failing
/// cell leaves the others untouched.
pub fn run_sweep(base: &Scenario, matrix: &SweepMatrix, jobs: usize) -> Vec<SweepOutcome> {
    let cells = matrix.cells();
    let run = |cell: SweepCell| {
        let result = cell.scenario(base).and_then(|sc| run_scenario(&sc));
        SweepOutcome { cell, result }
    };
    if jobs <= 1 {
        return cells.into_iter().map(run).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| cells.into_par_iter().map(run).collect()),
        Err(_) => cells.into_iter().map(run).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plr_tokens() {
        assert_eq!("0.5".parse::<PlrCase>().unwrap(), PlrCase::new(0.5, false));
        assert_eq!("0.5vr".parse::<PlrCase>().unwrap(), PlrCase::new(0.5, true));
        assert_eq!("300%".parse::<PlrCase>().unwrap(), PlrCase::new(3.0, false));
        assert!("-1".parse::<PlrCase>().is_err());
        assert!("fast".parse::<PlrCase>().is_err());
        assert_eq!(PlrCase::new(0.5, true).to_string(), "0.5vr");
    }

    #[test]
    fn standard_matrix_order() {
        let m = SweepMatrix::standard();
        let cells = m.cells();
        assert_eq!(cells.len(), 80);
        assert_eq!(cells[0].kind, FaultKind::SingleLineToGround);
        assert_eq!(cells[0].location, "PCC");
        assert_eq!(cells[1].case, PlrCase::new(0.5, true));
        assert_eq!(cells[4].location, "SHORT");
        assert_eq!(cells[20].kind, FaultKind::DoubleLineToGround);
        assert_eq!(cells[1].label(), "SL2G_PCC_plr50_vr");
    }

    #[test]
    fn empty_matrix() {
        let m = SweepMatrix {
            kinds: vec![],
            locations: vec!["PCC".into()],
            plr_cases: PlrCase::standard(),
        };
        assert!(m.cells().is_empty());
    }
}
