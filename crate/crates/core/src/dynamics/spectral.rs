use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DynamicsError, DENSE_QUBIT_LIMIT};
use crate::hamiltonian::PauliHamiltonian;

/// Eigenphases of the qubitization walk operator, one per eigenvalue of
/// the Hamiltonian without its identity part.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkSpectrum {
    /// One-norm of the non-identity coefficients.
    pub lambda: f64,
    pub identity_offset: f64,
    /// `arcsin(E_k / lambda)` in ascending order.
    pub phases: Vec<f64>,
}

/// Walk phases `arcsin(E_k / lambda)` from a dense diagonalization.
pub fn walk_eigenphases(h: &PauliHamiltonian) -> Result<WalkSpectrum, DynamicsError> {
    if h.n_qubits > DENSE_QUBIT_LIMIT {
        return Err(DynamicsError::Capacity {
            requested: h.n_qubits,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let lambda = h.l1_norm();
    if lambda == 0.0 {
        return Err(DynamicsError::ZeroNorm);
    }
    let mut energies: Vec<f64> = h
        .without_identity()
        .to_dense()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    energies.sort_by(f64::total_cmp);
    Ok(WalkSpectrum {
        lambda,
        identity_offset: h.identity_coefficient,
        // |E| <= lambda by the triangle inequality; clamp rounding only
        phases: energies
            .iter()
            .map(|e| (e / lambda).clamp(-1.0, 1.0).asin())
            .collect(),
    })
}

/// `lambda * sin(phi) + identity_offset`.
pub fn energy_from_walk_phase(phi: f64, lambda: f64, identity_offset: f64) -> Result<f64, DynamicsError> {
    if !(phi.abs() <= FRAC_PI_2 + 1e-12) {
        return Err(DynamicsError::Range(phi));
    }
    Ok(lambda * phi.sin() + identity_offset)
}

/// Eigenphases in `(-pi, pi]` and orthonormal eigenvectors (columns) of a
/// unitary matrix, from its complex Schur form.
pub fn unitary_eigenpairs(u: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>), DynamicsError> {
    if !u.is_square() {
        return Err(DynamicsError::Dimension {
            expected: u.nrows(),
            found: u.ncols(),
        });
    }
    // a normal matrix has a diagonal Schur form, so Q holds eigenvectors
    let (q, t) = u.clone().schur().unpack();
    let phases = (0..t.nrows())
        .map(|i| {
            let a = t[(i, i)].arg();
            if a <= -PI {
                a + 2.0 * PI
            } else {
                a
            }
        })
        .collect();
    Ok((phases, q))
}
