//! Pauli strings in symplectic (X-mask, Z-mask) form and real-coefficient
//! qubit Hamiltonians.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::HamiltonianError;

/// Largest register a [`PauliString`] can address.
pub const MAX_PAULI_QUBITS: usize = 128;

/// A tensor product of single-qubit Paulis.
///
/// Per qubit the bit pair `(x, z)` selects `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`,
/// `(0,1)=Z`. The operator represented is `i^{|x&z|} X^x Z^z`, which puts an
/// exact `Y` wherever both bits are set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x_mask: u128,
    pub z_mask: u128,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString {
        x_mask: 0,
        z_mask: 0,
    };

    pub fn new(x_mask: u128, z_mask: u128) -> Self {
        Self { x_mask, z_mask }
    }

    pub fn x(qubit: usize) -> Self {
        Self::new(1 << qubit, 0)
    }

    pub fn y(qubit: usize) -> Self {
        Self::new(1 << qubit, 1 << qubit)
    }

    pub fn z(qubit: usize) -> Self {
        Self::new(0, 1 << qubit)
    }

    /// Parses a label such as `"XIZY"`, qubit 0 first.
    pub fn from_label(label: &str) -> Result<Self, HamiltonianError> {
        if label.chars().count() > MAX_PAULI_QUBITS {
            return Err(HamiltonianError::Capacity {
                requested: label.chars().count(),
                limit: MAX_PAULI_QUBITS,
            });
        }
        let mut p = Self::IDENTITY;
        for (q, c) in label.chars().enumerate() {
            let bit = 1u128 << q;
            match c {
                'I' => {}
                'X' => p.x_mask |= bit,
                'Y' => {
                    p.x_mask |= bit;
                    p.z_mask |= bit;
                }
                'Z' => p.z_mask |= bit,
                other => return Err(HamiltonianError::BadPauliLabel(other)),
            }
        }
        Ok(p)
    }

    /// Label over `{I,X,Y,Z}` of length `n_qubits`, qubit 0 first.
    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| {
                let bit = 1u128 << q;
                match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                }
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn support(&self) -> u128 {
        self.x_mask | self.z_mask
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Highest qubit index touched plus one (0 for the identity).
    pub fn min_qubits(&self) -> usize {
        128 - self.support().leading_zeros() as usize
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones())
            % 2
            == 0
    }

    /// Product `self * other = i^k * result`; returns `(k mod 4, result)`.
    pub fn mul(&self, other: &PauliString) -> (u8, PauliString) {
        let x = self.x_mask ^ other.x_mask;
        let z = self.z_mask ^ other.z_mask;
        let k = self.y_count() as i64 + other.y_count() as i64
            + 2 * (self.z_mask & other.x_mask).count_ones() as i64
            - (x & z).count_ones() as i64;
        (k.rem_euclid(4) as u8, PauliString::new(x, z))
    }

    /// `P|b> = phase * |b ^ x_mask>`; returns the phase for basis index `b`.
    pub fn basis_phase(&self, b: u128) -> Complex64 {
        let sign = if (self.z_mask & b).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        i_pow(self.y_count() as u8) * sign
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 least significant.
    pub fn to_dense(&self, n_qubits: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let row = b ^ self.x_mask as usize;
            m[(row, b)] = self.basis_phase(b as u128);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.min_qubits().max(1);
        f.write_str(&self.label(n))
    }
}

pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Qubit Hamiltonian `c_0 I + sum_j c_j P_j` with real coefficients in hartree.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    pub n_qubits: usize,
    pub identity_coefficient: f64,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, identity_coefficient: f64) -> Self {
        Self {
            n_qubits,
            identity_coefficient,
            terms: BTreeMap::new(),
        }
    }

    /// Builds from `(label, coefficient)` pairs; identity labels fold into
    /// the identity coefficient.
    pub fn from_labels<'a>(
        identity_coefficient: f64,
        terms: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self, HamiltonianError> {
        let mut n_qubits = 0;
        let mut h = Self::new(0, identity_coefficient);
        for (label, c) in terms {
            n_qubits = n_qubits.max(label.chars().count());
            h.add_term(PauliString::from_label(label)?, c);
        }
        h.n_qubits = n_qubits;
        Ok(h)
    }

    /// Adds `c * p`, merging with any existing coefficient.
    pub fn add_term(&mut self, p: PauliString, c: f64) {
        if p.is_identity() {
            self.identity_coefficient += c;
            return;
        }
        self.n_qubits = self.n_qubits.max(p.min_qubits());
        *self.terms.entry(p).or_insert(0.0) += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        if p.is_identity() {
            self.identity_coefficient
        } else {
            self.terms.get(p).copied().unwrap_or(0.0)
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of `|c_j|` over the non-identity terms.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Drops every non-identity term with `|c| < threshold`.
    pub fn truncate_terms(&self, threshold: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            identity_coefficient: self.identity_coefficient,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() >= threshold)
                .map(|(p, c)| (*p, *c))
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            identity_coefficient: alpha * self.identity_coefficient,
            terms: self.terms.iter().map(|(p, c)| (*p, alpha * c)).collect(),
        }
    }

    /// Same operator with the identity coefficient set to zero.
    pub fn without_identity(&self) -> Self {
        Self {
            identity_coefficient: 0.0,
            ..self.clone()
        }
    }

    /// True when every term is a product of `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|p| p.x_mask == 0)
    }

    /// `<b|H|b>` for a computational basis state.
    pub fn diagonal_element(&self, b: u128) -> f64 {
        self.identity_coefficient
            + self
                .terms
                .iter()
                .filter(|(p, _)| p.x_mask == 0)
                .map(|(p, c)| {
                    if (p.z_mask & b).count_ones() % 2 == 0 {
                        *c
                    } else {
                        -*c
                    }
                })
                .sum::<f64>()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(self.identity_coefficient, 0.0);
        for (p, c) in &self.terms {
            for b in 0..dim {
                let row = b ^ p.x_mask as usize;
                m[(row, b)] += p.basis_phase(b as u128) * *c;
            }
        }
        m
    }

    /// CSV with header `pauli_string,coefficient`; the identity row comes first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pauli_string,coefficient\n");
        out.push_str(&format!(
            "{},{}\n",
            PauliString::IDENTITY.label(self.n_qubits),
            self.identity_coefficient
        ));
        for (p, c) in &self.terms {
            out.push_str(&format!("{},{}\n", p.label(self.n_qubits), c));
        }
        out
    }
}
