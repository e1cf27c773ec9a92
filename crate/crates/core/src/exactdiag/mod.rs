//! Exact reference spectra: explicit ladder matrices for tiny systems and
//! matrix-free Lanczos within fixed particle-number sectors.

mod dense;
mod lanczos;
mod sector;

use thiserror::Error;

pub use dense::{
    dense_fermionic_matrix, dense_spectrum, ladder_matrix, number_operator_matrix,
    DENSE_CAPACITY,
};
pub use lanczos::{lanczos_extremal, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use sector::{
    apply_in_sector, dense_sector_spectrum, lowest_eigenpairs, sector_basis, sector_matrix,
    Amplitude, SectorBasis, SectorOperator, DENSE_SECTOR_LIMIT,
};

use nalgebra::DVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactDiagError {
    #[error("{requested} spin-orbitals requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("vector length {found} does not match sector dimension {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("Lanczos did not converge in {iterations} iterations (worst residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

/// Lowest eigenvalues in ascending order with their residuals
/// `||H x - lambda x||` and unit eigenvectors in sector coordinates.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub eigenvectors: Vec<DVector<f64>>,
}
