//! Fermionic Hamiltonian construction and the Jordan-Wigner mapping to
//! Pauli operators.

mod fermion;
mod jordan_wigner;
mod pauli;

use thiserror::Error;

pub use fermion::{
    build_fermion_hamiltonian, FermionHamiltonian, FermionTerm, LadderKind, LadderProduct,
    BUILD_DROP_THRESHOLD,
};
#[allow(unused_imports)]
pub(crate) use fermion::mulliken_images;
pub use jordan_wigner::{
    jordan_wigner, jordan_wigner_with_limit, ladder_operator_paulis, DEFAULT_QUBIT_LIMIT,
};
pub use pauli::{PauliHamiltonian, PauliString, MAX_PAULI_QUBITS};
pub(crate) use pauli::i_pow;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("orbital index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },
    #[error("{requested} qubits requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("invalid Pauli label character {0:?}")]
    BadPauliLabel(char),
    #[error("Hamiltonian is not Hermitian: imaginary coefficient {imag:e} on {term}")]
    NotHermitian { term: String, imag: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Alpha,
    Beta,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Alpha, Spin::Beta];
}

/// Spatial orbital (0-based) with a spin label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinOrbital {
    pub orbital: usize,
    pub spin: Spin,
}

impl SpinOrbital {
    pub fn new(orbital: usize, spin: Spin) -> Self {
        Self { orbital, spin }
    }

    /// Block ordering: alpha orbitals occupy `0..n`, beta orbitals `n..2n`.
    pub fn flat_index(&self, n_orbitals: usize) -> usize {
        match self.spin {
            Spin::Alpha => self.orbital,
            Spin::Beta => self.orbital + n_orbitals,
        }
    }

    pub fn from_flat_index(index: usize, n_orbitals: usize) -> Self {
        if index < n_orbitals {
            Self::new(index, Spin::Alpha)
        } else {
            Self::new(index - n_orbitals, Spin::Beta)
        }
    }
}
