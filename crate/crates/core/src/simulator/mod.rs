//! Dense state-vector simulation: Pauli exponentials (optionally
//! controlled), trial-state preparation and single-qubit measurement.
//!
//! Qubit 0 is the least significant bit of the basis index, so a basis
//! index doubles as a spin-orbital occupation bit-set.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::broombridge::{ProblemDescription, TokenKind};
use crate::hamiltonian::{PauliHamiltonian, PauliString};

/// Largest register a [`StateVector`] may hold (512 MiB of amplitudes).
pub const MAX_STATE_QUBITS: usize = 25;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulatorError {
    #[error("{requested} qubits requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("no initial state labelled {0:?}")]
    UnknownLabel(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("control qubit {0} lies in the support of the Pauli string")]
    Overlap(usize),
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self, SimulatorError> {
        if n_qubits > MAX_STATE_QUBITS {
            return Err(SimulatorError::Capacity {
                requested: n_qubits,
                limit: MAX_STATE_QUBITS,
            });
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, SimulatorError> {
        if n_qubits > MAX_STATE_QUBITS {
            return Err(SimulatorError::Capacity {
                requested: n_qubits,
                limit: MAX_STATE_QUBITS,
            });
        }
        if amps.len() != 1 << n_qubits {
            return Err(SimulatorError::Dimension {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalize(&mut self) -> Result<(), SimulatorError> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(SimulatorError::ZeroNorm);
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    /// `index,re,im` rows for every amplitude.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,re,im\n");
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(s, "{i},{:e},{:e}", a.re, a.im);
        }
        s
    }

    fn check_pauli(&self, p: &PauliString) -> Result<(), SimulatorError> {
        if p.min_qubits() > self.n_qubits {
            return Err(SimulatorError::Dimension {
                expected: self.n_qubits,
                found: p.min_qubits(),
            });
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimulatorError> {
        if q >= self.n_qubits {
            return Err(SimulatorError::Argument(format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// A normalized trial state together with where it came from.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: StateVector,
    pub source_label: String,
    /// Number of basis states with a nonzero injected amplitude.
    pub configuration_count: usize,
}

/// The computational basis state whose bits are `occupation`.
pub fn prepare_basis_state(n_qubits: usize, occupation: u128) -> Result<StateVector, SimulatorError> {
    if n_qubits < 128 && occupation >> n_qubits != 0 {
        return Err(SimulatorError::Argument(format!(
            "occupation {occupation:#b} does not fit in {n_qubits} qubits"
        )));
    }
    let mut s = StateVector::zero(n_qubits)?;
    s.amps[0] = ZERO;
    s.amps[occupation as usize] = ONE;
    Ok(s)
}

/// Applies one ladder operator to an occupation bit-set with the
/// Jordan-Wigner sign `(-1)^(occupied modes below q)`.
fn apply_ladder(bits: u128, q: usize, raise: bool) -> Option<(u128, f64)> {
    let m = 1u128 << q;
    if (bits & m != 0) == raise {
        return None;
    }
    let sign = if (bits & (m - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((bits ^ m, sign))
}

/// Builds the superposition named `label` on `2 * n_orbitals` qubits.
///
/// Each term's operators act on the vacuum right to left; the resulting
/// vector is normalized, so the raw coefficients only matter up to scale.
pub fn prepare_ansatz(problem: &ProblemDescription, label: &str) -> Result<PreparedState, SimulatorError> {
    let ansatz = problem
        .ansatz(label)
        .ok_or_else(|| SimulatorError::UnknownLabel(label.to_string()))?;
    let n_orbitals = problem.n_orbitals;
    let mut state = StateVector::zero(2 * n_orbitals)?;
    state.amps[0] = ZERO;
    for term in &ansatz.terms {
        let mut bits = 0u128;
        let mut sign = 1.0;
        let mut alive = true;
        for tok in term.ops.iter().rev() {
            let q = tok.spin_orbital().flat_index(n_orbitals);
            match apply_ladder(bits, q, tok.kind == TokenKind::Raise) {
                Some((b, s)) => {
                    bits = b;
                    sign *= s;
                }
                None => {
                    alive = false;
                    break;
                }
            }
        }
        if alive {
            state.amps[bits as usize] += Complex64::new(sign * term.coefficient, 0.0);
        }
    }
    let configuration_count = state.amps.iter().filter(|a| a.norm_sqr() > 0.0).count();
    state.normalize()?;
    Ok(PreparedState {
        state,
        source_label: label.to_string(),
        configuration_count,
    })
}

/// `exp(-i theta P)` on the amplitudes whose index has all bits of
/// `control_mask` set (every amplitude when the mask is zero).
fn pauli_exponential_masked(state: &mut StateVector, p: &PauliString, theta: f64, control_mask: usize) {
    let (s, c) = theta.sin_cos();
    let x = p.x_mask as usize;
    let z = p.z_mask as usize;
    let y_phase = crate::hamiltonian::i_pow(p.y_count() as u8);
    let amps = &mut state.amps;
    if x == 0 {
        let plus = Complex64::new(c, -s);
        let minus = Complex64::new(c, s);
        for (b, a) in amps.iter_mut().enumerate() {
            if b & control_mask == control_mask {
                *a *= if (b & z).count_ones() % 2 == 0 { plus } else { minus };
            }
        }
        return;
    }
    // -i sin(theta) times the phase of P on each member of a pair
    let minus_i_s = Complex64::new(0.0, -s);
    let pivot = 1usize << (usize::BITS - 1 - x.leading_zeros());
    for b in 0..amps.len() {
        if b & pivot != 0 || b & control_mask != control_mask {
            continue;
        }
        let b2 = b ^ x;
        let sign = |i: usize| if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        // P|b> = ph(b)|b2>, P|b2> = ph(b2)|b>
        let ph_b = y_phase * sign(b);
        let ph_b2 = y_phase * sign(b2);
        let a = amps[b];
        let a2 = amps[b2];
        amps[b] = a * c + minus_i_s * ph_b2 * a2;
        amps[b2] = a2 * c + minus_i_s * ph_b * a;
    }
}

/// `state <- exp(-i theta P) state`.
pub fn apply_pauli_exponential(state: &mut StateVector, p: &PauliString, theta: f64) -> Result<(), SimulatorError> {
    state.check_pauli(p)?;
    pauli_exponential_masked(state, p, theta, 0);
    Ok(())
}

/// `exp(-i theta P)` on the `control = 1` subspace only.
pub fn apply_controlled_pauli_exponential(
    state: &mut StateVector,
    control: usize,
    p: &PauliString,
    theta: f64,
) -> Result<(), SimulatorError> {
    state.check_qubit(control)?;
    state.check_pauli(p)?;
    if (p.support() >> control) & 1 == 1 {
        return Err(SimulatorError::Overlap(control));
    }
    pauli_exponential_masked(state, p, theta, 1 << control);
    Ok(())
}

/// Multiplies the `control = 1` amplitudes by `exp(-i phi)`.
pub fn apply_controlled_phase(state: &mut StateVector, control: usize, phi: f64) -> Result<(), SimulatorError> {
    state.check_qubit(control)?;
    let ph = Complex64::from_polar(1.0, -phi);
    let m = 1usize << control;
    for (b, a) in state.amps.iter_mut().enumerate() {
        if b & m != 0 {
            *a *= ph;
        }
    }
    Ok(())
}

/// Applies the 2x2 unitary `[[u00, u01], [u10, u11]]` to `qubit`.
pub fn apply_single_qubit_gate(
    state: &mut StateVector,
    qubit: usize,
    u: [[Complex64; 2]; 2],
) -> Result<(), SimulatorError> {
    state.check_qubit(qubit)?;
    let m = 1usize << qubit;
    for b in 0..state.amps.len() {
        if b & m != 0 {
            continue;
        }
        let a0 = state.amps[b];
        let a1 = state.amps[b | m];
        state.amps[b] = u[0][0] * a0 + u[0][1] * a1;
        state.amps[b | m] = u[1][0] * a0 + u[1][1] * a1;
    }
    Ok(())
}

pub fn hadamard() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `S^dagger = diag(1, -i)`.
pub fn s_dagger() -> [[Complex64; 2]; 2] {
    [[ONE, ZERO], [ZERO, Complex64::new(0.0, -1.0)]]
}

/// `<psi|H|psi>` including the identity coefficient.
pub fn expectation(state: &StateVector, h: &PauliHamiltonian) -> Result<f64, SimulatorError> {
    if h.n_qubits > state.n_qubits {
        return Err(SimulatorError::Dimension {
            expected: state.n_qubits,
            found: h.n_qubits,
        });
    }
    let mut total = Complex64::new(h.identity_coefficient * state.norm_sqr(), 0.0);
    for (p, &c) in h.terms() {
        state.check_pauli(p)?;
        let x = p.x_mask as usize;
        let mut acc = ZERO;
        for (b, a) in state.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            acc += state.amps[b ^ x].conj() * p.basis_phase(b as u128) * a;
        }
        total += acc * c;
    }
    Ok(total.re)
}

/// Probability of reading 1 on `qubit`.
pub fn probability_one(state: &StateVector, qubit: usize) -> Result<f64, SimulatorError> {
    state.check_qubit(qubit)?;
    let m = 1usize << qubit;
    Ok(state
        .amps
        .iter()
        .enumerate()
        .filter(|(b, _)| b & m != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        / state.norm_sqr())
}

/// Samples `qubit` in the computational basis and collapses the state.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    rng: &mut R,
) -> Result<u8, SimulatorError> {
    let p1 = probability_one(state, qubit)?;
    let outcome = u8::from(rng.gen::<f64>() < p1);
    let m = 1usize << qubit;
    for (b, a) in state.amps.iter_mut().enumerate() {
        if ((b & m != 0) as u8) != outcome {
            *a = ZERO;
        }
    }
    state.normalize()?;
    Ok(outcome)
}

/// `<a|b>`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<Complex64, SimulatorError> {
    if a.n_qubits != b.n_qubits {
        return Err(SimulatorError::Dimension {
            expected: a.n_qubits,
            found: b.n_qubits,
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut s = StateVector::from_amplitudes(n, amps).unwrap();
        s.normalize().unwrap();
        s
    }

    fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
        PauliString::new(rng.gen_range(0..1u128 << n), rng.gen_range(0..1u128 << n))
    }

    fn dense_apply(m: &DMatrix<Complex64>, s: &StateVector) -> Vec<Complex64> {
        (m * DVector::from_column_slice(s.amplitudes())).iter().copied().collect()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn basis_states() {
        let s = prepare_basis_state(4, 0b0011).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(prepare_basis_state(1, 0).unwrap().amplitudes(), &[ONE, ZERO]);
        assert!(prepare_basis_state(2, 0b100).is_err());
    }

    #[test]
    fn rotation_identities() {
        let mut s = prepare_basis_state(1, 0).unwrap();
        apply_pauli_exponential(&mut s, &PauliString::x(0), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(close(s.amplitudes(), &[ZERO, Complex64::new(0.0, -1.0)], 1e-15));
        let mut s = prepare_basis_state(1, 0).unwrap();
        apply_pauli_exponential(&mut s, &PauliString::z(0), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(close(s.amplitudes(), &[Complex64::new(0.0, -1.0), ZERO], 1e-15));
    }

    #[test]
    fn closed_form_against_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let n = rng.gen_range(1..=4);
            let p = random_pauli(n, &mut rng);
            let theta: f64 = rng.gen_range(-3.0..3.0);
            let dim = 1 << n;
            let m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(theta.cos(), 0.0)
                - p.to_dense(n) * Complex64::new(0.0, theta.sin());
            let s0 = random_state(n, &mut rng);
            let mut s = s0.clone();
            apply_pauli_exponential(&mut s, &p, theta).unwrap();
            assert!(close(s.amplitudes(), &dense_apply(&m, &s0), 1e-12));
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            apply_pauli_exponential(&mut s, &p, -theta).unwrap();
            assert!(close(s.amplitudes(), s0.amplitudes(), 1e-12));
        }
    }

    #[test]
    fn composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = PauliString::from_label("XYZ").unwrap();
        let s0 = random_state(3, &mut rng);
        let mut a = s0.clone();
        apply_pauli_exponential(&mut a, &p, 0.3).unwrap();
        apply_pauli_exponential(&mut a, &p, 0.5).unwrap();
        let mut b = s0.clone();
        apply_pauli_exponential(&mut b, &p, 0.8).unwrap();
        assert!(close(a.amplitudes(), b.amplitudes(), 1e-12));
        let mut c = s0.clone();
        apply_pauli_exponential(&mut c, &p, 0.0).unwrap();
        assert_eq!(c, s0);
    }

    #[test]
    fn controlled_exponential() {
        let p = PauliString::z(0);
        let theta = 0.7;
        // control (qubit 1) in |0>: nothing happens
        let mut s = prepare_basis_state(2, 0b01).unwrap();
        apply_controlled_pauli_exponential(&mut s, 1, &p, theta).unwrap();
        assert_eq!(s, prepare_basis_state(2, 0b01).unwrap());
        // control in |1>: same as uncontrolled
        let mut s = prepare_basis_state(2, 0b11).unwrap();
        apply_controlled_pauli_exponential(&mut s, 1, &p, theta).unwrap();
        let mut t = prepare_basis_state(2, 0b11).unwrap();
        apply_pauli_exponential(&mut t, &p, theta).unwrap();
        assert_eq!(s, t);
        // control in superposition, target |1>: dense 4x4 comparison
        let mut s = prepare_basis_state(2, 0b01).unwrap();
        apply_single_qubit_gate(&mut s, 1, hadamard()).unwrap();
        let s0 = s.clone();
        apply_controlled_pauli_exponential(&mut s, 1, &p, theta).unwrap();
        let mut m = DMatrix::<Complex64>::identity(4, 4);
        let ez = Complex64::from_polar(1.0, theta); // exp(-i theta Z) on |1> of qubit 0
        let ez0 = Complex64::from_polar(1.0, -theta);
        m[(2, 2)] = ez0;
        m[(3, 3)] = ez;
        assert!(close(s.amplitudes(), &dense_apply(&m, &s0), 1e-15));
        assert_eq!(
            apply_controlled_pauli_exponential(&mut s, 0, &p, theta),
            Err(SimulatorError::Overlap(0))
        );
    }

    #[test]
    fn expectation_values() {
        let z = PauliHamiltonian::from_labels(0.0, [("Z", 1.0)]).unwrap();
        assert_eq!(expectation(&prepare_basis_state(1, 0).unwrap(), &z).unwrap(), 1.0);
        let c = PauliHamiltonian::new(2, -1.25);
        assert_eq!(expectation(&prepare_basis_state(2, 3).unwrap(), &c).unwrap(), -1.25);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = PauliHamiltonian::from_labels(0.3, [("XY", 0.4), ("ZZ", -0.2), ("YI", 0.9)]).unwrap();
        let s = random_state(2, &mut rng);
        let v = DVector::from_column_slice(s.amplitudes());
        let dense = (v.adjoint() * h.to_dense() * &v)[(0, 0)];
        assert!((expectation(&s, &h).unwrap() - dense.re).abs() < 1e-12);
    }

    #[test]
    fn measurement_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut ones = 0;
        for _ in 0..10_000 {
            let mut s = prepare_basis_state(1, 0).unwrap();
            apply_single_qubit_gate(&mut s, 0, hadamard()).unwrap();
            ones += measure_qubit(&mut s, 0, &mut rng).unwrap() as usize;
        }
        assert!((ones as f64 / 1e4 - 0.5).abs() < 0.02);

        let mut s = prepare_basis_state(1, 1).unwrap();
        assert_eq!(measure_qubit(&mut s, 0, &mut rng).unwrap(), 1);
        let mut s = random_state(3, &mut rng);
        let first = measure_qubit(&mut s, 1, &mut rng).unwrap();
        for _ in 0..5 {
            assert_eq!(measure_qubit(&mut s, 1, &mut rng).unwrap(), first);
        }
        assert!(s.is_normalized(1e-12));
    }

    #[test]
    fn overlaps() {
        let a = prepare_basis_state(2, 1).unwrap();
        let b = prepare_basis_state(2, 2).unwrap();
        assert_eq!(overlap(&a, &a).unwrap(), ONE);
        assert_eq!(overlap(&a, &b).unwrap(), ZERO);
        assert!(overlap(&a, &prepare_basis_state(3, 1).unwrap()).is_err());
    }
}
