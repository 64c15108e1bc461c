//! Scenario files: one fault on one network under one PLR case.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::diagnostic::{Collector, Diagnostic, DiagnosticKind, Diagnostics, Parsed};
use super::network_file::{load_network, SCHEMA_VERSION};
use crate::engine::{effective_load_kw, installed_pv_kw, FrequencyTrace, OutputSettings, Scenario, Timeline};
use crate::netmodel::{FaultKind, FaultSpec, NetworkModel, Phase, DEFAULT_FAULT_ADMITTANCE_PU, DEFAULT_FAULT_DURATION_S};
use crate::solver::SolveSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    pub kind: FaultKind,
    /// Bus id or named fault location (`PCC`, `FAR`, ...).
    pub bus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Phase>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_on_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_fault_pu: Option<f64>,
}

/// Per-unit replacement of IBR fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbrOverride {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_rated_kva: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_set_kw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_set_kvar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_limit_pu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frt_curve: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol_pu: Option<f64>,
    pub max_iter: Option<usize>,
    pub relaxation: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub dt_s: Option<f64>,
    pub t_pre_s: Option<f64>,
    pub t_end_s: Option<f64>,
    /// `[[t_s, f_hz], ...]`, strictly increasing in time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_trace: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub profile_snapshot_times_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Relative paths resolve against the scenario file's directory.
    pub network_path: PathBuf,
    pub fault: FaultSection,
    pub plr: f64,
    #[serde(default)]
    pub voltage_regulation: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ibr_overrides: Vec<IbrOverride>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

impl ScenarioFile {
    /// Network path as seen from the current directory.
    pub fn resolved_network_path(&self, scenario_path: &Path) -> PathBuf {
        if self.network_path.is_absolute() {
            return self.network_path.clone();
        }
        scenario_path
            .parent()
            .map_or_else(|| self.network_path.clone(), |dir| dir.join(&self.network_path))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Diagnostics {
    Diagnostics(vec![Diagnostic::error(
        DiagnosticKind::Io,
        "",
        format!("cannot read {}: {e}", path.display()),
    )])
}

/// Parse a scenario document without resolving its network.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile, Diagnostics> {
    let mut c = Collector::default();
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        Diagnostics(vec![Diagnostic::error(
            DiagnosticKind::Schema,
            "",
            format!("malformed JSON: {e}"),
        )])
    })?;
    c.check_finite("", &value);
    let file: Option<ScenarioFile> = c.deserialize("", value);
    if let Some(f) = &file {
        if f.schema_version != SCHEMA_VERSION {
            c.error(
                DiagnosticKind::Schema,
                "schema_version",
                format!("unsupported schema version \"{}\" (expected \"{SCHEMA_VERSION}\")", f.schema_version),
            );
        }
    }
    match file {
        Some(f) if !c.has_errors() => Ok(f),
        _ => Err(Diagnostics(c.items)),
    }
}

pub fn read_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile, Diagnostics> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_scenario_file(&text)
}

/// Read a scenario and its network; every error is reported.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, Diagnostics> {
    let path = path.as_ref();
    let file = read_scenario_file(path)?;
    let net_path = file.resolved_network_path(path);
    let net = load_network(&net_path).map_err(|d| {
        Diagnostics(
            d.0.into_iter()
                .map(|mut x| {
                    x.message = format!("{} (in {})", x.message, net_path.display());
                    x
                })
                .collect(),
        )
    })?;
    resolve_scenario(&file, Arc::new(net)).into_result().map(|(sc, _)| sc)
}

/// Fill defaults, apply IBR overrides, and check the result against `net`.
pub fn resolve_scenario(file: &ScenarioFile, net: Arc<NetworkModel>) -> Parsed<Scenario> {
    let mut c = Collector::default();
    c.check(file.plr >= 0.0, "plr", "must be non-negative");

    let bus = net
        .resolve_location(&file.fault.bus)
        .map(str::to_string)
        .unwrap_or_else(|| {
            c.error(
                DiagnosticKind::Reference,
                "fault.bus",
                format!("unknown bus or fault location \"{}\"", file.fault.bus),
            );
            file.fault.bus.clone()
        });

    let t_pre_s = file.engine.t_pre_s.unwrap_or(crate::engine::DEFAULT_T_PRE_S);
    let fault = FaultSpec {
        kind: file.fault.kind,
        bus,
        phases: file
            .fault
            .phases
            .clone()
            .unwrap_or_else(|| file.fault.kind.default_phases()),
        t_on_s: file.fault.t_on_s.unwrap_or(t_pre_s),
        duration_s: file.fault.duration_s.unwrap_or(DEFAULT_FAULT_DURATION_S),
        y_fault_pu: file.fault.y_fault_pu.unwrap_or(DEFAULT_FAULT_ADMITTANCE_PU),
    };
    if let Err(e) = fault.validate() {
        let path = match e {
            crate::netmodel::NetError::KindPhaseMismatch { .. } => "fault.phases",
            _ => "fault",
        };
        c.error(DiagnosticKind::Validation, path, e.to_string());
    }
    c.check(fault.t_on_s >= 0.0, "fault.t_on_s", "must be non-negative");

    let defaults = SolveSettings::default();
    let solver = SolveSettings {
        tol_pu: file.solver.tol_pu.unwrap_or(defaults.tol_pu),
        max_iter: file.solver.max_iter.unwrap_or(defaults.max_iter),
        relaxation: file.solver.relaxation.unwrap_or(defaults.relaxation),
    };
    if let Err(e) = solver.validate() {
        c.error(DiagnosticKind::Validation, "solver", e);
    }

    let mut timeline = Timeline::around(fault.t_clear_s());
    timeline.t_pre_s = fault.t_on_s;
    if let Some(dt) = file.engine.dt_s {
        timeline.dt_s = dt;
    }
    if let Some(t_end) = file.engine.t_end_s {
        timeline.t_end_s = t_end;
    }
    c.check(timeline.dt_s > 0.0, "engine.dt_s", "must be positive");
    c.check(
        timeline.t_end_s > fault.t_clear_s(),
        "engine.t_end_s",
        format!("must exceed fault clearing at {} s", fault.t_clear_s()),
    );
    let frequency_trace = file.engine.frequency_trace.clone().map(FrequencyTrace);
    if let Some(tr) = &frequency_trace {
        c.check(!tr.0.is_empty(), "engine.frequency_trace", "must not be empty");
        c.check(
            tr.0.windows(2).all(|w| w[1].0 > w[0].0),
            "engine.frequency_trace",
            "times must be strictly increasing",
        );
        c.check(
            tr.0.iter().all(|p| p.1 > 0.0),
            "engine.frequency_trace",
            "frequencies must be positive",
        );
    }

    let network = if file.ibr_overrides.is_empty() {
        net
    } else {
        let mut n = (*net).clone();
        for (k, o) in file.ibr_overrides.iter().enumerate() {
            let p = format!("ibr_overrides[{k}]");
            let Some(u) = n.ibrs.iter_mut().find(|u| u.id == o.id) else {
                c.error(DiagnosticKind::Reference, format!("{p}.id"), format!("unknown IBR \"{}\"", o.id));
                continue;
            };
            if let Some(v) = o.s_rated_kva {
                c.check(v > 0.0, format!("{p}.s_rated_kva"), "must be positive");
                u.s_rated_kva = v;
            }
            if let Some(v) = o.p_set_kw {
                u.p_set_kw = v;
            }
            if let Some(v) = o.q_set_kvar {
                u.q_set_kvar = v;
            }
            if let Some(v) = o.i_limit_pu {
                c.check(v > 0.0, format!("{p}.i_limit_pu"), "must be positive");
                u.i_limit_pu = v;
            }
            if let Some(v) = &o.frt_curve {
                if !n.frt_curves.contains_key(v) {
                    c.error(DiagnosticKind::Reference, format!("{p}.frt_curve"), format!("unknown FRT curve \"{v}\""));
                }
                u.frt_curve = v.clone();
            }
        }
        Arc::new(n)
    };

    let mut sc = Scenario {
        label: String::new(),
        network,
        fault,
        plr: file.plr,
        voltage_regulation: file.voltage_regulation,
        solver,
        timeline,
        frequency_trace,
        outputs: OutputSettings {
            directory: file.outputs.directory.clone(),
            profile_snapshot_times_s: file.outputs.profile_snapshot_times_s.clone(),
        },
    };
    sc.label = file.label.clone().unwrap_or_else(|| sc.default_label());
    if !c.has_errors() {
        c.items.extend(validate_cross(&sc.network, &sc));
    }
    Parsed {
        value: if c.has_errors() { None } else { Some(sc) },
        diagnostics: c.items,
    }
}

/// Checks that need both the network and the scenario.
pub fn validate_cross(net: &NetworkModel, sc: &Scenario) -> Vec<Diagnostic> {
    let mut c = Collector::default();
    match net.bus(&sc.fault.bus) {
        None => c.error(
            DiagnosticKind::Reference,
            "fault.bus",
            format!("unknown bus \"{}\"", sc.fault.bus),
        ),
        Some(b) => {
            for p in &sc.fault.phases {
                if !b.phases.contains(*p) {
                    c.error(
                        DiagnosticKind::Validation,
                        "fault.phases",
                        format!("phase {p} not present at bus \"{}\"", b.id),
                    );
                }
            }
        }
    }
    let required = sc.plr * effective_load_kw(net);
    let installed = installed_pv_kw(net);
    if required > installed * (1.0 + 1e-12) {
        c.warning(
            DiagnosticKind::Validation,
            "plr",
            format!(
                "required PV output exceeds installed capacity ({:.1} kW needed, {:.1} kW installed)",
                required, installed
            ),
        );
    }
    c.items
}
