//! Network and scenario files.
//!
//! Loading never stops at the first problem: every schema, reference and
//! validation finding is collected with its document path, and no model is
//! returned while any of them is an error.

mod diagnostic;
mod network_file;
mod placement;
mod scenario_file;

pub use diagnostic::{Diagnostic, DiagnosticKind, Diagnostics, Parsed, Severity};
pub use network_file::{
    load_network, network_to_file, network_to_json, parse_network, write_network, BusRecord, CapacitorRecord,
    IbrRecord, LineRecord, LoadRecord, NetworkFile, RegulatorRecord, SourceRecord, TransformerRecord, BUILTIN_CURVE,
    SCHEMA_VERSION,
};
pub use placement::{place_rooftops, RooftopPlan};
pub use scenario_file::{
    load_scenario, parse_scenario_file, read_scenario_file, resolve_scenario, validate_cross, EngineSection,
    FaultSection, IbrOverride, OutputsSection, ScenarioFile, SolverSection,
};
