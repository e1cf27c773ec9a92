//! Shot-by-shot simulation of the controlled-power circuit.
//!
//! The ancilla is not stored. With the ancilla in `|+>`, the controlled
//! power `V = U^p` and a final rotation into the X (`w = 1`) or Y
//! (`w = -i`) basis, outcome `o` leaves the system in
//! `(psi + (-1)^o w V psi) / 2` with probability equal to its squared norm.
//! This is the exact post-measurement state of the full register.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::{RpeConfig, RpeError};
use crate::dynamics::CompiledStep;

/// Below this residual `V psi` is treated as a multiple of `psi`, so later
/// shots in the round no longer change the state.
const EIGEN_RESIDUAL: f64 = 1e-10;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Outcome-0 probability `(1 + Re(w <psi|V psi>)) / 2`.
pub(super) fn p_zero(w: Complex64, overlap: Complex64) -> f64 {
    (0.5 * (1.0 + (w * overlap).re)).clamp(0.0, 1.0)
}

/// Counts of outcome 0 in the X and Y bases for one round.
fn round<R: Rng + ?Sized>(
    step: &CompiledStep,
    psi: &mut [Complex64],
    power: u64,
    shots: u32,
    rng: &mut R,
) -> Result<[u32; 2], RpeError> {
    let bases = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
    let mut zeros = [0u32; 2];
    let mut eigen: Option<Complex64> = None;
    for (slot, &w) in bases.iter().enumerate() {
        for _ in 0..shots {
            if let Some(lambda) = eigen {
                zeros[slot] += u32::from(rng.gen::<f64>() < p_zero(w, lambda));
                continue;
            }
            let mut phi = psi.to_vec();
            step.apply_power(&mut phi, power)?;
            let lambda = inner(psi, &phi);
            let residual = phi
                .iter()
                .zip(psi.iter())
                .map(|(f, s)| (f - lambda * s).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if residual <= EIGEN_RESIDUAL {
                eigen = Some(lambda);
                zeros[slot] += u32::from(rng.gen::<f64>() < p_zero(w, lambda));
                continue;
            }
            let zero = rng.gen::<f64>() < p_zero(w, lambda);
            zeros[slot] += u32::from(zero);
            let s = if zero { w } else { -w };
            psi.iter_mut().zip(&phi).for_each(|(a, f)| *a += s * f);
            let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|a| *a /= norm);
        }
    }
    Ok(zeros)
}

/// Combines the round-`k` angle `theta` (an estimate of `p phi mod 2 pi`)
/// with the running estimate by picking the nearest of the `p` candidates.
pub(super) fn refine(previous: f64, theta: f64, power: u64) -> f64 {
    let p = power as f64;
    let j = ((p * previous - theta) / (2.0 * PI)).round();
    (theta + 2.0 * PI * j) / p
}

/// Runs all rounds on a copy of `initial`; returns the phase estimate.
pub(super) fn run<R: Rng + ?Sized>(
    step: &CompiledStep,
    initial: &[Complex64],
    config: &RpeConfig,
    rng: &mut R,
) -> Result<f64, RpeError> {
    let mut psi = initial.to_vec();
    let shots = config.shots_per_round;
    let mut estimate = 0.0;
    for k in 0..config.bits {
        let power = 1u64 << k;
        let [zx, zy] = round(step, &mut psi, power, shots, rng)?;
        let cx = 2.0 * zx as f64 / shots as f64 - 1.0;
        let cy = 2.0 * zy as f64 / shots as f64 - 1.0;
        let theta = cy.atan2(cx);
        estimate = if k == 0 { theta } else { refine(estimate, theta, power) };
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::trotter::tests::random_hamiltonian;
    use crate::dynamics::{controlled_trotter_step, TrotterOrder, TrotterPlan};
    use crate::simulator::{apply_single_qubit_gate, hadamard, probability_one, s_dagger, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        v
    }

    #[test]
    fn branch_formula_matches_full_register() {
        let n = 3;
        let h = random_hamiltonian(n, 8, 4);
        let plan = TrotterPlan::new(&h, 0.3, TrotterOrder::Second).unwrap();
        let step = CompiledStep::new(&plan, None).unwrap();
        let psi = random_state(n, 9);
        for power in [1u64, 2, 4] {
            let mut phi = psi.clone();
            step.apply_power(&mut phi, power).unwrap();
            let lambda = inner(&psi, &phi);
            for (y_basis, w) in [(false, Complex64::new(1.0, 0.0)), (true, Complex64::new(0.0, -1.0))] {
                // ancilla is the top qubit
                let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (n + 1)];
                amps[..1 << n].copy_from_slice(&psi);
                let mut full = StateVector::from_amplitudes(n + 1, amps).unwrap();
                apply_single_qubit_gate(&mut full, n, hadamard()).unwrap();
                for _ in 0..power {
                    controlled_trotter_step(&mut full, &plan, n).unwrap();
                }
                if y_basis {
                    apply_single_qubit_gate(&mut full, n, s_dagger()).unwrap();
                }
                apply_single_qubit_gate(&mut full, n, hadamard()).unwrap();
                let p0 = 1.0 - probability_one(&full, n).unwrap();
                assert!((p0 - p_zero(w, lambda)).abs() < 1e-12);

                // unnormalized outcome-0 branch
                for (b, a) in full.amplitudes()[..1 << n].iter().enumerate() {
                    let expected = 0.5 * (psi[b] + w * phi[b]);
                    assert!((a - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn refine_picks_nearest_candidate() {
        let phi: f64 = 2.9;
        let theta = (4.0 * phi).rem_euclid(2.0 * PI);
        assert!((refine(2.85, theta, 4) - phi).abs() < 1e-12);
        let neg: f64 = -3.05;
        let theta = (8.0 * neg).rem_euclid(2.0 * PI);
        assert!((refine(-3.0, theta, 8) - neg).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_phase_resolved() {
        let h = crate::hamiltonian::PauliHamiltonian::from_labels(0.0, [("ZI", 0.7), ("ZZ", -0.4), ("IZ", 0.25)]).unwrap();
        let plan = TrotterPlan::new(&h, 0.5, TrotterOrder::First).unwrap();
        let step = CompiledStep::new(&plan, None).unwrap();
        let mut initial = vec![Complex64::new(0.0, 0.0); 4];
        initial[0b01] = Complex64::new(1.0, 0.0);
        // qubit 0 occupied: Z0 = -1, Z1 = +1
        let energy = -0.7 + 0.4 + 0.25;
        let config = RpeConfig::new(10, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phase = run(&step, &initial, &config, &mut rng).unwrap();
        let err = (super::super::wrap_phase(phase + energy * 0.5)).abs() / 0.5;
        assert!(err <= config.error_target(), "error {err}");
    }
}
