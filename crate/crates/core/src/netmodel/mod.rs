//! Phase-domain network representation.

mod fault;
mod network;
mod phase;
mod sequence;
mod ybus;

use thiserror::Error;

pub use fault::{
    stamp_fault, FaultKind, FaultSpec, DEFAULT_FAULT_ADMITTANCE_PU, DEFAULT_FAULT_DURATION_S,
};
pub use network::{
    Bus, Connection, FaultLocation, LineBranch, NetworkModel, NetworkParts, SourceEquivalent,
    TransformerBranch, Zone,
};
pub use phase::{Phase, PhaseSet};
pub use sequence::{
    alpha, alpha2, components_matrix, components_matrix_inverse, from_sequence,
    seq_to_phase_impedance, to_sequence, Matrix3c, PhasorTriple, SequenceTriple,
};
pub use ybus::{
    build_passive_ybus, build_ybus, build_ybus_with, dense_solve, transformer_block,
    BusPhaseIndex, SparseMatrix, StampOptions, YBus,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("unknown bus {0}")]
    UnknownBus(String),
    #[error("phases {phases} not present at bus {bus}")]
    PhaseMismatch { bus: String, phases: String },
    #[error("{kind} fault needs {} phase(s), got {phases}", kind.phase_count())]
    KindPhaseMismatch { kind: FaultKind, phases: usize },
    #[error("bus {bus} phase {phase} has no path to the source")]
    SingularNetwork { bus: String, phase: Phase },
    #[error("invalid network: {0}")]
    InvalidModel(String),
}
