//! Time evolution by Trotter-Suzuki product formulas, and the spectrum of
//! the qubitization walk operator.

mod compiled;
mod spectral;
pub(crate) mod trotter;

use thiserror::Error;

pub use compiled::{CompiledStep, DENSE_STEP_LIMIT};
pub use spectral::{energy_from_walk_phase, unitary_eigenpairs, walk_eigenphases, WalkSpectrum};
pub use trotter::{
    adjoint_trotter_step, controlled_trotter_step, dense_step_unitary, evolve, exact_propagator,
    steps_for, trotter_step, TrotterOrder, TrotterPlan,
};

use crate::simulator::SimulatorError;

/// Register size up to which full dense matrices are built.
pub const DENSE_QUBIT_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{requested} requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("Hamiltonian has zero one-norm")]
    ZeroNorm,
    #[error("walk phase {0} lies outside [-pi/2, pi/2]")]
    Range(f64),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
}
