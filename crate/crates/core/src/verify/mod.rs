//! Single-fault verification of lattice circuits.

pub mod faults;
pub mod frame;
pub mod pauli;
pub mod recovery;
pub mod report;
pub mod simulate;
pub mod tableau;

pub use faults::{enumerate_single_faults, Fault, FaultKind, Prepared};
pub use frame::{propagate_pauli, Frame, FrameSimulator};
pub use pauli::{Pauli, PauliOperator};
pub use recovery::{
    build_recovery_table, readout_flip_weight, split_weight_zero_state, steane_weight,
    steane_weight_zero_state, Conflict, RecoveryBook, RecoveryTable, TrainingGadget, Weighting,
};
pub use report::{
    extraction_gadgets, preparation_gadgets, prepare, recovery_book, verify_component,
    verify_single_fault_tolerance, Component, Criterion, FaultRecord, FaultReport, FaultSummary,
};
pub use simulate::{measurement_gauges, random_records, simulate_stabilizer, Gauge};
pub use tableau::StabilizerTableau;

use thiserror::Error;

use crate::lattice::LayoutError;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("layer {layer} holds a non-Clifford operation")]
    NonClifford { layer: usize },
    #[error("{0} sites exceed the frame width of 128")]
    TooLarge(usize),
    #[error("block {0} has no complete set of qubits")]
    MissingBlock(u16),
    #[error("operator on {0} qubits for a circuit with {1} sites")]
    Size(usize, usize),
    #[error("record {0} of an extraction is 1 in the fault-free run")]
    NonzeroReference(u32),
    #[error("{0} random fault-free outcomes are too many branches to enumerate")]
    TooManyGauges(usize),
    #[error("gadget must hold exactly one extraction of the requested type")]
    NoExtraction,
    #[error(transparent)]
    Layout(#[from] LayoutError),
}
