//! Scenario orchestration: PLR dispatch, the fault timeline with
//! ride-through evaluation, and batch sweeps.

mod dispatch;
mod run;
mod scenario;
mod sweep;

pub use dispatch::{apply_plr, effective_load_kw, installed_pv_kw, Dispatch};
pub use run::{run_scenario, EngineError, SimulationResult, StepLog, StepStage, TripRecord, MAX_EVENT_ROUNDS};
pub use scenario::{
    plr_percent, FrequencyTrace, OutputSettings, Scenario, Timeline, DEFAULT_DT_S, DEFAULT_POST_CLEAR_S,
    DEFAULT_T_PRE_S,
};
pub use sweep::{run_sweep, PlrCase, SweepCell, SweepMatrix, SweepOutcome, STANDARD_LOCATIONS};
