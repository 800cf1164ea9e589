//! Holonomic gates in decoherence-free subspaces with control-accelerated
//! adiabaticity: Hamiltonians, propagators, Berry phases and sweeps.

pub mod control;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod holonomy;
pub mod linalg;
pub mod propagation;
pub mod selftest;

pub use control::{ControlSegment, KickSchedule, PulseKind, PulseTrain, Resonance};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, GridSpec, KickEquivalenceReport, ResultBundle, SweepRow, SweepVariable};
pub use hamiltonians::{Couplings, DfsBasis, GateKind, GateSpec, Schedule};
pub use holonomy::{GateMatrix, HolonomyResult};
pub use linalg::{Operator, StateVector, C64};
pub use propagation::{Frame, PropagationResult, StepPolicy};
