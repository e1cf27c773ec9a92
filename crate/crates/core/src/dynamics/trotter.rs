use nalgebra::DMatrix;
use num_complex::Complex64;

use super::DynamicsError;
use crate::hamiltonian::{PauliHamiltonian, PauliString};
use crate::simulator::{
    apply_controlled_pauli_exponential, apply_controlled_phase, apply_pauli_exponential,
    StateVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrotterOrder {
    First,
    Second,
}

/// A product-formula step `exp(-i H t)` approximated term by term.
///
/// Terms are ordered by (weight, x-mask, z-mask). The identity coefficient
/// enters as the global phase `exp(-i c t)` per step.
#[derive(Clone, Debug, PartialEq)]
pub struct TrotterPlan {
    n_qubits: usize,
    identity_coefficient: f64,
    terms: Vec<(PauliString, f64)>,
    order: TrotterOrder,
    step_size: f64,
}

impl TrotterPlan {
    pub fn new(h: &PauliHamiltonian, step_size: f64, order: TrotterOrder) -> Result<Self, DynamicsError> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(DynamicsError::Argument(format!(
                "step size must be positive, got {step_size}"
            )));
        }
        let mut terms: Vec<(PauliString, f64)> = h.terms().map(|(p, c)| (*p, *c)).collect();
        terms.sort_by_key(|(p, _)| (p.weight(), p.x_mask, p.z_mask));
        Ok(Self {
            n_qubits: h.n_qubits,
            identity_coefficient: h.identity_coefficient,
            terms,
            order,
            step_size,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.identity_coefficient
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn order(&self) -> TrotterOrder {
        self.order
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    /// Steps per unit time, `1 / t`.
    pub fn trotter_number(&self) -> f64 {
        1.0 / self.step_size
    }

    /// `(P, theta)` rotations of one step in application order, with
    /// `theta = c * tau` for the signed time `tau`.
    pub(crate) fn rotations(&self, tau: f64) -> Vec<(PauliString, f64)> {
        match self.order {
            TrotterOrder::First => self.terms.iter().map(|&(p, c)| (p, c * tau)).collect(),
            TrotterOrder::Second => {
                let half = 0.5 * tau;
                self.terms
                    .iter()
                    .chain(self.terms.iter().rev())
                    .map(|&(p, c)| (p, c * half))
                    .collect()
            }
        }
    }

    fn check(&self, state: &StateVector, extra: usize) -> Result<(), DynamicsError> {
        if state.n_qubits() != self.n_qubits + extra {
            return Err(DynamicsError::Dimension {
                expected: self.n_qubits + extra,
                found: state.n_qubits(),
            });
        }
        Ok(())
    }
}

fn global_phase(state: &mut StateVector, phi: f64) {
    let ph = Complex64::from_polar(1.0, -phi);
    state.amplitudes_mut().iter_mut().for_each(|a| *a *= ph);
}

/// One product-formula step on a register of exactly `plan.n_qubits()`.
pub fn trotter_step(state: &mut StateVector, plan: &TrotterPlan) -> Result<(), DynamicsError> {
    plan.check(state, 0)?;
    for (p, theta) in plan.rotations(plan.step_size) {
        apply_pauli_exponential(state, &p, theta)?;
    }
    global_phase(state, plan.identity_coefficient * plan.step_size);
    Ok(())
}

/// Inverse of [`trotter_step`]: the rotations in reverse order with
/// negated angles.
pub fn adjoint_trotter_step(state: &mut StateVector, plan: &TrotterPlan) -> Result<(), DynamicsError> {
    plan.check(state, 0)?;
    for (p, theta) in plan.rotations(plan.step_size).into_iter().rev() {
        apply_pauli_exponential(state, &p, -theta)?;
    }
    global_phase(state, -plan.identity_coefficient * plan.step_size);
    Ok(())
}

/// [`trotter_step`] conditioned on `control`, which must be the extra
/// qubit above the system register.
pub fn controlled_trotter_step(
    state: &mut StateVector,
    plan: &TrotterPlan,
    control: usize,
) -> Result<(), DynamicsError> {
    plan.check(state, 1)?;
    for (p, theta) in plan.rotations(plan.step_size) {
        apply_controlled_pauli_exponential(state, control, &p, theta)?;
    }
    apply_controlled_phase(state, control, plan.identity_coefficient * plan.step_size)?;
    Ok(())
}

/// Number of whole steps in `total_time`, which must be an integer
/// multiple of the step size (negative for backward evolution).
pub fn steps_for(plan: &TrotterPlan, total_time: f64) -> Result<i64, DynamicsError> {
    let k = total_time / plan.step_size;
    let r = k.round();
    if !k.is_finite() || (k - r).abs() > 1e-12 * r.abs().max(1.0) {
        return Err(DynamicsError::Argument(format!(
            "total time {total_time} is not a multiple of the step size {}",
            plan.step_size
        )));
    }
    Ok(r as i64)
}

/// Repeated steps covering `total_time`; negative times run the adjoint.
pub fn evolve(state: &mut StateVector, plan: &TrotterPlan, total_time: f64) -> Result<(), DynamicsError> {
    let k = steps_for(plan, total_time)?;
    plan.check(state, 0)?;
    for _ in 0..k.unsigned_abs() {
        if k > 0 {
            trotter_step(state, plan)?;
        } else {
            adjoint_trotter_step(state, plan)?;
        }
    }
    Ok(())
}

/// Dense matrix of one step, column `j` being the step applied to `|j>`.
pub fn dense_step_unitary(plan: &TrotterPlan) -> Result<DMatrix<Complex64>, DynamicsError> {
    if plan.n_qubits > super::DENSE_QUBIT_LIMIT {
        return Err(DynamicsError::Capacity {
            requested: plan.n_qubits,
            limit: super::DENSE_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << plan.n_qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut s = crate::simulator::prepare_basis_state(plan.n_qubits, j as u128)?;
        trotter_step(&mut s, plan)?;
        u.set_column(j, &nalgebra::DVector::from_column_slice(s.amplitudes()));
    }
    Ok(u)
}

/// Exact `exp(-i H t)` by diagonalizing the dense Hamiltonian.
pub fn exact_propagator(h: &PauliHamiltonian, t: f64) -> Result<DMatrix<Complex64>, DynamicsError> {
    if h.n_qubits > super::DENSE_QUBIT_LIMIT {
        return Err(DynamicsError::Capacity {
            requested: h.n_qubits,
            limit: super::DENSE_QUBIT_LIMIT,
        });
    }
    let eig = h.to_dense().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    Ok(v * phases * v.adjoint())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::simulator::prepare_basis_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hamiltonian(n: usize, terms: usize, seed: u64) -> PauliHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = PauliHamiltonian::new(n, rng.gen_range(-1.0..1.0));
        while h.len() < terms {
            let p = PauliString::new(rng.gen_range(0..1u128 << n), rng.gen_range(0..1u128 << n));
            if !p.is_identity() {
                h.add_term(p, rng.gen_range(-1.0..1.0));
            }
        }
        h
    }

    fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
        m.clone().singular_values().max()
    }

    #[test]
    fn ordering_is_deterministic() {
        let h = PauliHamiltonian::from_labels(0.0, [("XX", 1.0), ("Z", 2.0), ("ZZ", 3.0), ("IX", 4.0)]).unwrap();
        let plan = TrotterPlan::new(&h, 0.1, TrotterOrder::First).unwrap();
        let labels: Vec<String> = plan.terms().iter().map(|(p, _)| p.label(2)).collect();
        assert_eq!(labels, ["ZI", "IX", "ZZ", "XX"]);
        assert!(TrotterPlan::new(&h, 0.0, TrotterOrder::First).is_err());
    }

    #[test]
    fn commuting_terms_are_exact() {
        let h = PauliHamiltonian::from_labels(0.4, [("ZZI", 0.7), ("IZZ", -0.3), ("ZIZ", 1.1), ("XXX", 0.2)]).unwrap();
        for order in [TrotterOrder::First, TrotterOrder::Second] {
            let plan = TrotterPlan::new(&h, 0.9, order).unwrap();
            let u = dense_step_unitary(&plan).unwrap();
            let exact = exact_propagator(&h, 0.9).unwrap();
            assert!(spectral_norm(&(u - exact)) < 1e-12);
        }
    }

    #[test]
    fn single_step_error_orders() {
        let mut ratios = [0.0; 2];
        let seeds = 20;
        for seed in 0..seeds {
            let h = random_hamiltonian(3, 6, seed);
            for (i, order) in [TrotterOrder::First, TrotterOrder::Second].into_iter().enumerate() {
                let err = |t: f64| {
                    let plan = TrotterPlan::new(&h, t, order).unwrap();
                    spectral_norm(&(dense_step_unitary(&plan).unwrap() - exact_propagator(&h, t).unwrap()))
                };
                ratios[i] += err(0.02) / err(0.01) / seeds as f64;
            }
        }
        assert!((3.4..=4.6).contains(&ratios[0]), "{ratios:?}");
        assert!((6.0..=10.0).contains(&ratios[1]), "{ratios:?}");
    }

    #[test]
    fn evolve_forward_and_back() {
        let h = random_hamiltonian(3, 5, 3);
        let plan = TrotterPlan::new(&h, 0.25, TrotterOrder::First).unwrap();
        let s0 = prepare_basis_state(3, 5).unwrap();
        let mut s = s0.clone();
        evolve(&mut s, &plan, 1.0).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        evolve(&mut s, &plan, -1.0).unwrap();
        for (a, b) in s.amplitudes().iter().zip(s0.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let mut z = s0.clone();
        evolve(&mut z, &plan, 0.0).unwrap();
        assert_eq!(z, s0);
        assert!(matches!(evolve(&mut z, &plan, 0.3), Err(DynamicsError::Argument(_))));
    }

    #[test]
    fn eigenstate_acquires_energy_phase() {
        let h = PauliHamiltonian::from_labels(-0.5, [("ZI", 0.7), ("ZZ", 0.2)]).unwrap();
        let plan = TrotterPlan::new(&h, 0.5, TrotterOrder::First).unwrap();
        // |b=1>: Z0 = -1, Z0Z1 = -1
        let e = -0.5 - 0.7 - 0.2;
        let mut s = prepare_basis_state(2, 1).unwrap();
        evolve(&mut s, &plan, 2.0).unwrap();
        assert!((s.amplitudes()[1] - Complex64::from_polar(1.0, -e * 2.0)).norm() < 1e-12);
    }

    #[test]
    fn controlled_step_matches_branches() {
        let h = random_hamiltonian(2, 4, 9);
        let plan = TrotterPlan::new(&h, 0.3, TrotterOrder::Second).unwrap();
        let u = dense_step_unitary(&plan).unwrap();
        for control_bit in [0u128, 1] {
            for b in 0..4u128 {
                let mut s = prepare_basis_state(3, b | control_bit << 2).unwrap();
                controlled_trotter_step(&mut s, &plan, 2).unwrap();
                for row in 0..4usize {
                    let want = if control_bit == 1 {
                        u[(row, b as usize)]
                    } else if row == b as usize {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    let got = s.amplitudes()[row | (control_bit as usize) << 2];
                    assert!((got - want).norm() < 1e-12);
                }
            }
        }
    }
}
