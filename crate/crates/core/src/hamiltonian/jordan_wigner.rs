use std::collections::HashMap;

use num_complex::Complex64;

use super::{i_pow, FermionHamiltonian, HamiltonianError, LadderKind, PauliHamiltonian, PauliString};

/// Default ceiling on spin-orbitals (qubits) accepted by [`jordan_wigner`].
pub const DEFAULT_QUBIT_LIMIT: usize = 24;

const IMAG_TOLERANCE: f64 = 1e-9;
const DROP_THRESHOLD: f64 = 1e-12;

/// `a_p = Z_0..Z_{p-1} (X_p + iY_p)/2`, `a+_p = Z_0..Z_{p-1} (X_p - iY_p)/2`.
pub fn ladder_operator_paulis(kind: LadderKind, p: usize) -> [(Complex64, PauliString); 2] {
    let low = (1u128 << p) - 1;
    let bit = 1u128 << p;
    let y_sign = match kind {
        LadderKind::Annihilate => 0.5,
        LadderKind::Create => -0.5,
    };
    [
        (Complex64::new(0.5, 0.0), PauliString::new(bit, low)),
        (Complex64::new(0.0, y_sign), PauliString::new(bit, low | bit)),
    ]
}

pub fn jordan_wigner(h: &FermionHamiltonian) -> Result<PauliHamiltonian, HamiltonianError> {
    jordan_wigner_with_limit(h, DEFAULT_QUBIT_LIMIT)
}

/// Jordan-Wigner image of `h` with an explicit qubit limit (at most 128).
pub fn jordan_wigner_with_limit(
    h: &FermionHamiltonian,
    qubit_limit: usize,
) -> Result<PauliHamiltonian, HamiltonianError> {
    let limit = qubit_limit.min(super::MAX_PAULI_QUBITS);
    if h.n_spin_orbitals > limit {
        return Err(HamiltonianError::Capacity {
            requested: h.n_spin_orbitals,
            limit,
        });
    }

    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    let mut expansion: Vec<(Complex64, PauliString)> = Vec::new();
    let mut next: Vec<(Complex64, PauliString)> = Vec::new();
    for term in h.terms() {
        expansion.clear();
        expansion.push((Complex64::new(term.coefficient, 0.0), PauliString::IDENTITY));
        for (kind, p) in term.product.operators() {
            next.clear();
            for &(c, s) in &expansion {
                for (c2, s2) in ladder_operator_paulis(kind, p) {
                    let (k, prod) = s.mul(&s2);
                    next.push((c * c2 * i_pow(k), prod));
                }
            }
            std::mem::swap(&mut expansion, &mut next);
        }
        for &(c, s) in &expansion {
            *acc.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }

    let mut out = PauliHamiltonian::new(h.n_spin_orbitals, h.identity_offset);
    let mut entries: Vec<_> = acc.into_iter().collect();
    entries.sort_by_key(|e| e.0);
    for (p, c) in entries {
        if c.im.abs() > IMAG_TOLERANCE {
            return Err(HamiltonianError::NotHermitian {
                term: p.label(h.n_spin_orbitals),
                imag: c.im,
            });
        }
        if p.is_identity() {
            out.identity_coefficient += c.re;
        } else if c.re.abs() >= DROP_THRESHOLD {
            out.add_term(p, c.re);
        }
    }
    out.n_qubits = h.n_spin_orbitals;
    Ok(out)
}
