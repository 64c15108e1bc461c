//! The network data file: schema, validation and serialization.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::diagnostic::{Collector, Diagnostic, DiagnosticKind, Diagnostics, Parsed};
use crate::devices::{FrtCurve, Ibr, IbrKind, Regulator, ShuntCapacitor, ZipCoefficients, ZipLoad};
use crate::netmodel::{
    Bus, Connection, FaultLocation, LineBranch, NetworkModel, NetworkParts, Phase, PhaseSet, SourceEquivalent,
    TransformerBranch, Zone,
};

pub const SCHEMA_VERSION: &str = "1";
/// Name under which the built-in ride-through curve is always available.
pub const BUILTIN_CURVE: &str = "default_1547";

fn default_zone() -> Zone {
    Zone::Distribution
}
fn abc() -> PhaseSet {
    PhaseSet::ABC
}
fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn default_step() -> f64 {
    Regulator::DEFAULT_STEP_PU
}
fn default_range() -> i32 {
    Regulator::DEFAULT_TAP_RANGE
}
fn default_center() -> f64 {
    Regulator::DEFAULT_BAND_CENTER_PU
}
fn default_width() -> f64 {
    Regulator::DEFAULT_BAND_WIDTH_PU
}
fn is_default_zone(z: &Zone) -> bool {
    *z == Zone::Distribution
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: String,
    pub base_kv_ll: f64,
    #[serde(default = "abc")]
    pub phases: PhaseSet,
    #[serde(default = "default_zone", skip_serializing_if = "is_default_zone")]
    pub zone: Zone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length_km: f64,
    pub z1_ohm_per_km: Complex64,
    pub z0_ohm_per_km: Complex64,
    #[serde(default = "abc")]
    pub phases: PhaseSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub connection: Connection,
    pub s_rated_mva: f64,
    pub z_leak_pu: Complex64,
    #[serde(default = "yes")]
    pub grounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_ground_pu: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRecord {
    pub bus: String,
    #[serde(default = "one")]
    pub v_set_pu: f64,
    #[serde(default)]
    pub angle_deg: f64,
    pub z_internal_pu: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRecord {
    pub id: String,
    pub bus: String,
    pub phase: Phase,
    pub p_kw: f64,
    #[serde(default)]
    pub q_kvar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zip: Option<ZipCoefficients>,
    #[serde(default = "one")]
    pub v_nominal_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitorRecord {
    pub id: String,
    pub bus: String,
    #[serde(default = "abc")]
    pub phases: PhaseSet,
    pub q_rated_kvar: f64,
    #[serde(default = "yes")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulatorRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    #[serde(default = "abc")]
    pub phases: PhaseSet,
    #[serde(default = "default_step")]
    pub step_pu: f64,
    #[serde(default = "default_range")]
    pub tap_range: i32,
    #[serde(default = "default_center")]
    pub band_center_pu: f64,
    #[serde(default = "default_width")]
    pub band_width_pu: f64,
    #[serde(default)]
    pub taps: [i32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbrRecord {
    pub id: String,
    pub bus: String,
    pub phases: PhaseSet,
    pub kind: IbrKind,
    pub s_rated_kva: f64,
    pub p_set_kw: f64,
    #[serde(default)]
    pub q_set_kvar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_limit_pu: Option<f64>,
    #[serde(default = "builtin_curve")]
    pub frt_curve: String,
}

fn builtin_curve() -> String {
    BUILTIN_CURVE.to_string()
}

/// Typed form of a network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub schema_version: String,
    #[serde(default)]
    pub name: String,
    pub s_base_mva: f64,
    pub f_nominal_hz: f64,
    pub feeder_head: Option<String>,
    #[serde(default)]
    pub fault_locations: BTreeMap<String, String>,
    pub buses: Vec<BusRecord>,
    #[serde(default)]
    pub lines: Vec<LineRecord>,
    #[serde(default)]
    pub transformers: Vec<TransformerRecord>,
    pub sources: Vec<SourceRecord>,
    #[serde(default)]
    pub loads: Vec<LoadRecord>,
    #[serde(default)]
    pub capacitors: Vec<CapacitorRecord>,
    #[serde(default)]
    pub regulators: Vec<RegulatorRecord>,
    #[serde(default)]
    pub ibrs: Vec<IbrRecord>,
    #[serde(default)]
    pub frt_curves: BTreeMap<String, FrtCurve>,
}

const TOP_KEYS: &[&str] = &[
    "schema_version",
    "name",
    "s_base_mva",
    "f_nominal_hz",
    "feeder_head",
    "fault_locations",
    "buses",
    "lines",
    "transformers",
    "sources",
    "loads",
    "capacitors",
    "regulators",
    "ibrs",
    "frt_curves",
];

/// Read and validate a network file.
pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkModel, Diagnostics> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Diagnostics(vec![Diagnostic::error(
            DiagnosticKind::Io,
            "",
            format!("cannot read {}: {e}", path.display()),
        )])
    })?;
    parse_network(&text).into_result().map(|(net, _)| net)
}

/// Parse and validate a network document, collecting every diagnostic.
pub fn parse_network(text: &str) -> Parsed<NetworkModel> {
    let mut c = Collector::default();
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            c.error(DiagnosticKind::Schema, "", format!("malformed JSON: {e}"));
            return Parsed {
                value: None,
                diagnostics: c.items,
            };
        }
    };
    let file = read_file(&mut c, value);
    let value = file.and_then(|f| build_model(&mut c, f));
    Parsed {
        value: if c.has_errors() { None } else { value },
        diagnostics: c.items,
    }
}

fn read_file(c: &mut Collector, value: Value) -> Option<NetworkFile> {
    let Value::Object(mut top) = value else {
        c.error(DiagnosticKind::Schema, "", "document must be a JSON object");
        return None;
    };
    c.check_finite("", &Value::Object(top.clone()));
    for key in top.keys() {
        if !TOP_KEYS.contains(&key.as_str()) {
            c.error(DiagnosticKind::Schema, key.clone(), format!("unknown field `{key}`"));
        }
    }
    match top.get("schema_version") {
        Some(Value::String(s)) if s == SCHEMA_VERSION => {}
        Some(Value::String(s)) => c.error(
            DiagnosticKind::Schema,
            "schema_version",
            format!("unsupported schema version \"{s}\" (expected \"{SCHEMA_VERSION}\")"),
        ),
        Some(_) => c.error(DiagnosticKind::Schema, "schema_version", "expected a string"),
        None => c.error(DiagnosticKind::Schema, "schema_version", "missing field `schema_version`"),
    }
    let name = take_scalar::<String>(c, &mut top, "name").unwrap_or_default();
    let s_base_mva = take_scalar::<f64>(c, &mut top, "s_base_mva").unwrap_or(10.0);
    let f_nominal_hz = take_scalar::<f64>(c, &mut top, "f_nominal_hz").unwrap_or(60.0);
    let feeder_head = take_scalar::<String>(c, &mut top, "feeder_head");
    let fault_locations = take_scalar::<BTreeMap<String, String>>(c, &mut top, "fault_locations").unwrap_or_default();

    let buses = match top.remove("buses") {
        None => {
            c.error(DiagnosticKind::Schema, "buses", "missing field `buses`");
            Vec::new()
        }
        Some(Value::Array(items)) if items.is_empty() => {
            c.error(DiagnosticKind::Schema, "buses", "bus list is empty");
            Vec::new()
        }
        Some(v) => take_list(c, "buses", v),
    };
    let sources = match top.remove("sources") {
        None => {
            c.error(DiagnosticKind::Schema, "sources", "missing field `sources`");
            Vec::new()
        }
        Some(v) => take_list(c, "sources", v),
    };
    let mut list = |key: &str| top.remove(key);
    let lines = list("lines").map(|v| take_list(c, "lines", v)).unwrap_or_default();
    let transformers = list("transformers").map(|v| take_list(c, "transformers", v)).unwrap_or_default();
    let loads = list("loads").map(|v| take_list(c, "loads", v)).unwrap_or_default();
    let capacitors = list("capacitors").map(|v| take_list(c, "capacitors", v)).unwrap_or_default();
    let regulators = list("regulators").map(|v| take_list(c, "regulators", v)).unwrap_or_default();
    let ibrs = list("ibrs").map(|v| take_list(c, "ibrs", v)).unwrap_or_default();
    let mut frt_curves = BTreeMap::new();
    match list("frt_curves") {
        None => {}
        Some(Value::Object(map)) => {
            for (k, v) in map {
                if let Some(curve) = c.deserialize::<FrtCurve>(&format!("frt_curves.{k}"), v) {
                    frt_curves.insert(k, curve);
                }
            }
        }
        Some(_) => c.error(DiagnosticKind::Schema, "frt_curves", "expected an object of named curves"),
    }

    if c.has_errors() {
        return None;
    }
    Some(NetworkFile {
        schema_version: SCHEMA_VERSION.to_string(),
        name,
        s_base_mva,
        f_nominal_hz,
        feeder_head,
        fault_locations,
        buses,
        lines,
        transformers,
        sources,
        loads,
        capacitors,
        regulators,
        ibrs,
        frt_curves,
    })
}

fn take_scalar<T: serde::de::DeserializeOwned>(
    c: &mut Collector,
    top: &mut serde_json::Map<String, Value>,
    key: &str,
) -> Option<T> {
    top.remove(key).and_then(|v| c.deserialize(key, v))
}

fn take_list<T: serde::de::DeserializeOwned>(c: &mut Collector, key: &str, v: Value) -> Vec<T> {
    let Value::Array(items) = v else {
        c.error(DiagnosticKind::Schema, key, "expected a list");
        return Vec::new();
    };
    items
        .into_iter()
        .enumerate()
        .filter_map(|(k, item)| c.deserialize(&format!("{key}[{k}]"), item))
        .collect()
}

fn check_unique<'a>(c: &mut Collector, list: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = HashSet::new();
    for (k, id) in ids.enumerate() {
        if !seen.insert(id) {
            c.error(DiagnosticKind::Validation, format!("{list}[{k}].id"), format!("duplicate id \"{id}\""));
        }
    }
}

/// Cross-reference and invariant checks, then model construction.
fn build_model(c: &mut Collector, f: NetworkFile) -> Option<NetworkModel> {
    c.check(f.s_base_mva > 0.0, "s_base_mva", "must be positive");
    c.check(f.f_nominal_hz > 0.0, "f_nominal_hz", "must be positive");

    check_unique(c, "buses", f.buses.iter().map(|b| b.id.as_str()));
    check_unique(c, "lines", f.lines.iter().map(|b| b.id.as_str()));
    check_unique(c, "transformers", f.transformers.iter().map(|b| b.id.as_str()));
    check_unique(c, "loads", f.loads.iter().map(|b| b.id.as_str()));
    check_unique(c, "capacitors", f.capacitors.iter().map(|b| b.id.as_str()));
    check_unique(c, "regulators", f.regulators.iter().map(|b| b.id.as_str()));
    check_unique(c, "ibrs", f.ibrs.iter().map(|b| b.id.as_str()));

    let buses: HashMap<&str, &BusRecord> = f.buses.iter().map(|b| (b.id.as_str(), b)).collect();
    for (k, b) in f.buses.iter().enumerate() {
        c.check(b.base_kv_ll > 0.0, format!("buses[{k}].base_kv_ll"), "must be positive");
        c.check(!b.phases.is_empty(), format!("buses[{k}].phases"), "must list at least one phase");
    }
    let bus_ref = |c: &mut Collector, path: String, id: &str, phases: PhaseSet| {
        match buses.get(id) {
            None => c.error(DiagnosticKind::Reference, path, format!("unknown bus \"{id}\"")),
            Some(b) if !phases.is_subset_of(b.phases) => c.error(
                DiagnosticKind::Validation,
                path,
                format!("phases {phases} not present at bus \"{id}\" (has {})", b.phases),
            ),
            Some(_) => {}
        }
    };

    for (k, l) in f.lines.iter().enumerate() {
        let p = format!("lines[{k}]");
        bus_ref(c, format!("{p}.from"), &l.from, l.phases);
        bus_ref(c, format!("{p}.to"), &l.to, l.phases);
        c.check(l.length_km > 0.0, format!("{p}.length_km"), "must be positive");
        c.check(l.from != l.to, format!("{p}.to"), "line ends on its own sending bus");
        c.check(!l.phases.is_empty(), format!("{p}.phases"), "must list at least one phase");
        c.check(l.z1_ohm_per_km.norm() > 0.0, format!("{p}.z1_ohm_per_km"), "must be non-zero");
        c.check(l.z0_ohm_per_km.norm() > 0.0, format!("{p}.z0_ohm_per_km"), "must be non-zero");
    }
    for (k, t) in f.transformers.iter().enumerate() {
        let p = format!("transformers[{k}]");
        bus_ref(c, format!("{p}.from"), &t.from, PhaseSet::ABC);
        bus_ref(c, format!("{p}.to"), &t.to, PhaseSet::ABC);
        c.check(t.s_rated_mva > 0.0, format!("{p}.s_rated_mva"), "must be positive");
        c.check(t.z_leak_pu.norm() > 0.0, format!("{p}.z_leak_pu"), "must be non-zero");
    }
    c.check(f.sources.len() == 1, "sources", format!("exactly one source required, found {}", f.sources.len()));
    for (k, s) in f.sources.iter().enumerate() {
        let p = format!("sources[{k}]");
        bus_ref(c, format!("{p}.bus"), &s.bus, PhaseSet::ABC);
        c.check(s.v_set_pu > 0.0, format!("{p}.v_set_pu"), "must be positive");
        c.check(s.z_internal_pu.norm() > 0.0, format!("{p}.z_internal_pu"), "must be non-zero");
    }
    for (k, l) in f.loads.iter().enumerate() {
        let p = format!("loads[{k}]");
        bus_ref(c, format!("{p}.bus"), &l.bus, PhaseSet::single(l.phase));
        c.check(l.v_nominal_pu > 0.0, format!("{p}.v_nominal_pu"), "must be positive");
        if let Some(z) = l.zip {
            c.check(z.is_valid(), format!("{p}.zip"), "coefficients must be non-negative and sum to 1");
        }
    }
    for (k, cap) in f.capacitors.iter().enumerate() {
        let p = format!("capacitors[{k}]");
        bus_ref(c, format!("{p}.bus"), &cap.bus, cap.phases);
        c.check(cap.q_rated_kvar >= 0.0, format!("{p}.q_rated_kvar"), "must be non-negative");
    }
    for (k, r) in f.regulators.iter().enumerate() {
        let p = format!("regulators[{k}]");
        bus_ref(c, format!("{p}.from"), &r.from, r.phases);
        bus_ref(c, format!("{p}.to"), &r.to, r.phases);
        let has_line = f
            .lines
            .iter()
            .any(|l| l.from == r.from && l.to == r.to && r.phases.is_subset_of(l.phases));
        if !has_line {
            c.error(
                DiagnosticKind::Reference,
                format!("{p}.to"),
                format!("no line from \"{}\" to \"{}\" carries phases {}", r.from, r.to, r.phases),
            );
        }
        c.check(r.step_pu > 0.0 && r.step_pu < 0.1, format!("{p}.step_pu"), "must lie in (0, 0.1)");
        c.check(r.tap_range >= 0, format!("{p}.tap_range"), "must be non-negative");
        c.check(r.band_width_pu > 0.0, format!("{p}.band_width_pu"), "must be positive");
        c.check(
            r.taps.iter().all(|t| t.abs() <= r.tap_range),
            format!("{p}.taps"),
            "initial taps exceed the tap range",
        );
    }
    for (name, curve) in &f.frt_curves {
        if let Err(e) = curve.validate() {
            c.error(DiagnosticKind::Validation, format!("frt_curves.{name}"), e);
        }
    }
    for (k, u) in f.ibrs.iter().enumerate() {
        let p = format!("ibrs[{k}]");
        bus_ref(c, format!("{p}.bus"), &u.bus, u.phases);
        c.check(
            u.phases.len() == 1 || u.phases.len() == 3,
            format!("{p}.phases"),
            "an IBR connects to one phase or to all three",
        );
        c.check(u.s_rated_kva > 0.0, format!("{p}.s_rated_kva"), "must be positive");
        if let Some(lim) = u.i_limit_pu {
            c.check(lim > 0.0, format!("{p}.i_limit_pu"), "must be positive");
        }
        if u.frt_curve != BUILTIN_CURVE && !f.frt_curves.contains_key(&u.frt_curve) {
            c.error(
                DiagnosticKind::Reference,
                format!("{p}.frt_curve"),
                format!("unknown FRT curve \"{}\"", u.frt_curve),
            );
        }
    }
    if let Some(head) = &f.feeder_head {
        bus_ref(c, "feeder_head".into(), head, PhaseSet::EMPTY);
    }
    for (name, bus) in &f.fault_locations {
        bus_ref(c, format!("fault_locations.{name}"), bus, PhaseSet::EMPTY);
    }
    if c.has_errors() {
        return None;
    }
    match NetworkModel::new(file_to_parts(f)) {
        Ok(net) => Some(net),
        Err(e) => {
            c.error(DiagnosticKind::Validation, "", e.to_string());
            None
        }
    }
}

fn file_to_parts(f: NetworkFile) -> NetworkParts {
    let mut frt_curves = f.frt_curves;
    frt_curves
        .entry(BUILTIN_CURVE.to_string())
        .or_insert_with(FrtCurve::default_1547);
    let feeder_head = f
        .feeder_head
        .unwrap_or_else(|| f.sources.first().map(|s| s.bus.clone()).unwrap_or_default());
    NetworkParts {
        name: f.name,
        s_base_mva: f.s_base_mva,
        f_nominal_hz: f.f_nominal_hz,
        feeder_head,
        fault_locations: f
            .fault_locations
            .into_iter()
            .map(|(name, bus)| FaultLocation { name, bus })
            .collect(),
        buses: f
            .buses
            .into_iter()
            .map(|b| Bus {
                id: b.id,
                base_kv_ll: b.base_kv_ll,
                phases: b.phases,
                zone: b.zone,
            })
            .collect(),
        lines: f
            .lines
            .into_iter()
            .map(|l| LineBranch {
                id: l.id,
                from: l.from,
                to: l.to,
                length_km: l.length_km,
                z1_per_km: l.z1_ohm_per_km,
                z0_per_km: l.z0_ohm_per_km,
                phases: l.phases,
            })
            .collect(),
        transformers: f
            .transformers
            .into_iter()
            .map(|t| TransformerBranch {
                id: t.id,
                from: t.from,
                to: t.to,
                connection: t.connection,
                s_rated_mva: t.s_rated_mva,
                z_leak_pu: t.z_leak_pu,
                grounded: t.grounded,
                z_ground_pu: t.z_ground_pu,
            })
            .collect(),
        sources: f
            .sources
            .into_iter()
            .map(|s| SourceEquivalent {
                bus: s.bus,
                v_set_pu: s.v_set_pu,
                angle_deg: s.angle_deg,
                z_internal_pu: s.z_internal_pu,
            })
            .collect(),
        loads: f
            .loads
            .into_iter()
            .map(|l| ZipLoad {
                id: l.id,
                bus: l.bus,
                phase: l.phase,
                s_nominal_kva: Complex64::new(l.p_kw, l.q_kvar),
                coeffs: l.zip.unwrap_or_default(),
                v_nominal_pu: l.v_nominal_pu,
            })
            .collect(),
        capacitors: f
            .capacitors
            .into_iter()
            .map(|c| ShuntCapacitor {
                id: c.id,
                bus: c.bus,
                phases: c.phases,
                q_rated_kvar: c.q_rated_kvar,
                enabled: c.enabled,
            })
            .collect(),
        regulators: f
            .regulators
            .into_iter()
            .map(|r| Regulator {
                id: r.id,
                from: r.from,
                to: r.to,
                phases: r.phases,
                step_pu: r.step_pu,
                tap_range: r.tap_range,
                band_center_pu: r.band_center_pu,
                band_width_pu: r.band_width_pu,
                taps: r.taps,
            })
            .collect(),
        ibrs: f
            .ibrs
            .into_iter()
            .map(|u| Ibr {
                i_limit_pu: u.i_limit_pu.unwrap_or(if u.kind == IbrKind::RooftopPv {
                    Ibr::DEFAULT_ROOFTOP_I_LIMIT_PU
                } else {
                    Ibr::DEFAULT_PLANT_I_LIMIT_PU
                }),
                id: u.id,
                bus: u.bus,
                phases: u.phases,
                kind: u.kind,
                s_rated_kva: u.s_rated_kva,
                p_set_kw: u.p_set_kw,
                q_set_kvar: u.q_set_kvar,
                frt_curve: u.frt_curve,
            })
            .collect(),
        frt_curves,
    }
}

/// Typed document for a model; every defaulted field is written out.
pub fn network_to_file(net: &NetworkModel) -> NetworkFile {
    NetworkFile {
        schema_version: SCHEMA_VERSION.to_string(),
        name: net.name.clone(),
        s_base_mva: net.s_base_mva,
        f_nominal_hz: net.f_nominal_hz,
        feeder_head: Some(net.feeder_head.clone()),
        fault_locations: net
            .fault_locations
            .iter()
            .map(|l| (l.name.clone(), l.bus.clone()))
            .collect(),
        buses: net
            .buses
            .iter()
            .map(|b| BusRecord {
                id: b.id.clone(),
                base_kv_ll: b.base_kv_ll,
                phases: b.phases,
                zone: b.zone,
            })
            .collect(),
        lines: net
            .lines
            .iter()
            .map(|l| LineRecord {
                id: l.id.clone(),
                from: l.from.clone(),
                to: l.to.clone(),
                length_km: l.length_km,
                z1_ohm_per_km: l.z1_per_km,
                z0_ohm_per_km: l.z0_per_km,
                phases: l.phases,
            })
            .collect(),
        transformers: net
            .transformers
            .iter()
            .map(|t| TransformerRecord {
                id: t.id.clone(),
                from: t.from.clone(),
                to: t.to.clone(),
                connection: t.connection,
                s_rated_mva: t.s_rated_mva,
                z_leak_pu: t.z_leak_pu,
                grounded: t.grounded,
                z_ground_pu: t.z_ground_pu,
            })
            .collect(),
        sources: net
            .sources
            .iter()
            .map(|s| SourceRecord {
                bus: s.bus.clone(),
                v_set_pu: s.v_set_pu,
                angle_deg: s.angle_deg,
                z_internal_pu: s.z_internal_pu,
            })
            .collect(),
        loads: net
            .loads
            .iter()
            .map(|l| LoadRecord {
                id: l.id.clone(),
                bus: l.bus.clone(),
                phase: l.phase,
                p_kw: l.s_nominal_kva.re,
                q_kvar: l.s_nominal_kva.im,
                zip: (l.coeffs != ZipCoefficients::default()).then_some(l.coeffs),
                v_nominal_pu: l.v_nominal_pu,
            })
            .collect(),
        capacitors: net
            .capacitors
            .iter()
            .map(|c| CapacitorRecord {
                id: c.id.clone(),
                bus: c.bus.clone(),
                phases: c.phases,
                q_rated_kvar: c.q_rated_kvar,
                enabled: c.enabled,
            })
            .collect(),
        regulators: net
            .regulators
            .iter()
            .map(|r| RegulatorRecord {
                id: r.id.clone(),
                from: r.from.clone(),
                to: r.to.clone(),
                phases: r.phases,
                step_pu: r.step_pu,
                tap_range: r.tap_range,
                band_center_pu: r.band_center_pu,
                band_width_pu: r.band_width_pu,
                taps: r.taps,
            })
            .collect(),
        ibrs: net
            .ibrs
            .iter()
            .map(|u| IbrRecord {
                id: u.id.clone(),
                bus: u.bus.clone(),
                phases: u.phases,
                kind: u.kind,
                s_rated_kva: u.s_rated_kva,
                p_set_kw: u.p_set_kw,
                q_set_kvar: u.q_set_kvar,
                i_limit_pu: Some(u.i_limit_pu),
                frt_curve: u.frt_curve.clone(),
            })
            .collect(),
        frt_curves: net.frt_curves.clone(),
    }
}

/// Serialize a model as a pretty-printed network document.
pub fn network_to_json(net: &NetworkModel) -> String {
    serde_json::to_string_pretty(&network_to_file(net)).expect("network documents always serialize")
}

pub fn write_network(net: &NetworkModel, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut text = network_to_json(net);
    text.push('\n');
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn minimal() -> Value {
        json!({
            "schema_version": "1",
            "s_base_mva": 10.0,
            "f_nominal_hz": 60.0,
            "buses": [
                {"id": "1", "base_kv_ll": 12.47, "zone": "transmission"},
                {"id": "2", "base_kv_ll": 12.47}
            ],
            "lines": [{"id": "L", "from": "1", "to": "2", "length_km": 1.0,
                       "z1_ohm_per_km": [0.1, 0.2], "z0_ohm_per_km": [0.3, 0.6]}],
            "sources": [{"bus": "1", "z_internal_pu": [0.0, 0.01]}],
            "ibrs": [{"id": "pv", "bus": "2", "phases": ["a"], "kind": "rooftop_pv",
                      "s_rated_kva": 50.0, "p_set_kw": 40.0}]
        })
    }

    fn errors_of(doc: &Value) -> Vec<Diagnostic> {
        let p = parse_network(&doc.to_string());
        assert!(p.value.is_none(), "expected failure");
        p.diagnostics.into_iter().filter(Diagnostic::is_error).collect()
    }

    #[test]
    fn minimal_document_loads_with_defaults() {
        let (net, warnings) = parse_network(&minimal().to_string()).into_result().unwrap();
        assert!(warnings.is_empty());
        assert_eq!(net.feeder_head, "1");
        assert_eq!(net.ibrs[0].frt_curve, BUILTIN_CURVE);
        assert_eq!(net.ibrs[0].i_limit_pu, Ibr::DEFAULT_ROOFTOP_I_LIMIT_PU);
        assert!(net.frt_curves.contains_key(BUILTIN_CURVE));
    }

    #[test]
    fn empty_bus_list_is_one_error() {
        let mut doc = minimal();
        doc["buses"] = json!([]);
        doc.as_object_mut().unwrap().remove("lines");
        doc.as_object_mut().unwrap().remove("sources");
        doc.as_object_mut().unwrap().remove("ibrs");
        doc["sources"] = json!([]);
        let errs = errors_of(&doc);
        let at_buses: Vec<_> = errs.iter().filter(|d| d.path == "buses").collect();
        assert_eq!(at_buses.len(), 1);
        assert_eq!(at_buses[0].kind, DiagnosticKind::Schema);
    }

    #[test]
    fn dangling_ibr_bus_is_a_reference_error() {
        let mut doc = minimal();
        doc["ibrs"][0]["bus"] = json!("999");
        let errs = errors_of(&doc);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, DiagnosticKind::Reference);
        assert_eq!(errs[0].path, "ibrs[0].bus");
        assert!(errs[0].message.contains("999"));
    }

    #[test]
    fn all_errors_are_reported() {
        let mut doc = minimal();
        doc["ibrs"][0]["s_rated_kva"] = json!("big");
        doc["lines"][0]["colour"] = json!("red");
        doc["buses"][1]["base_kv_ll"] = json!(-1.0);
        doc["bogus"] = json!(1);
        let errs = errors_of(&doc);
        let paths: Vec<&str> = errs.iter().map(|d| d.path.as_str()).collect();
        assert!(paths.contains(&"ibrs[0].s_rated_kva"), "{paths:?}");
        assert!(paths.contains(&"lines[0].colour"), "{paths:?}");
        assert!(paths.contains(&"bogus"), "{paths:?}");
        assert!(errs.iter().all(|d| d.kind == DiagnosticKind::Schema));
    }

    #[test]
    fn validation_errors_carry_paths() {
        let mut doc = minimal();
        doc["buses"][1]["base_kv_ll"] = json!(-1.0);
        doc["ibrs"][0]["phases"] = json!(["a", "b"]);
        doc["ibrs"][0]["frt_curve"] = json!("missing");
        let errs = errors_of(&doc);
        let paths: Vec<&str> = errs.iter().map(|d| d.path.as_str()).collect();
        assert!(paths.contains(&"buses[1].base_kv_ll"));
        assert!(paths.contains(&"ibrs[0].phases"));
        assert!(paths.contains(&"ibrs[0].frt_curve"));
    }

    #[test]
    fn wrong_schema_version() {
        let mut doc = minimal();
        doc["schema_version"] = json!("2");
        assert_eq!(errors_of(&doc)[0].path, "schema_version");
    }

    #[test]
    fn round_trip_is_exact() {
        let (net, _) = parse_network(&minimal().to_string()).into_result().unwrap();
        let again = parse_network(&network_to_json(&net)).into_result().unwrap().0;
        assert_eq!(net, again);
    }
}
