//! Benchmark fixtures shared by the criterion targets.

use hqc_core::hamiltonians::h1_at;
use hqc_core::{GateKind, GateSpec, Operator, Schedule};

/// Phase-gate Hamiltonian at a generic point of the loop.
pub fn sample_h1() -> Operator {
    h1_at(0.4, 1.3)
}

pub fn phase_gate(period: f64) -> GateSpec {
    GateSpec::new(GateKind::Phase, Schedule::new(0.7605, period).expect("valid schedule"))
}
