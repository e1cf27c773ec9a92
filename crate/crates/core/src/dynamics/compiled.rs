use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::trotter::TrotterPlan;
use super::DynamicsError;
use crate::exactdiag::SectorBasis;
use crate::hamiltonian::PauliString;
use crate::simulator::StateVector;

/// Largest subspace [`CompiledStep::dense_unitary`] will materialize.
pub const DENSE_STEP_LIMIT: usize = 2048;

const LEAK_TOLERANCE: f64 = 1e-12;

struct PairRotation {
    i: u32,
    j: u32,
    cos: f64,
    // new[i] = cos * a[i] + to_i * a[j], new[j] = cos * a[j] + to_j * a[i]
    to_i: Complex64,
    to_j: Complex64,
}

enum Stage {
    Diagonal(Vec<Complex64>),
    Pairs(Vec<PairRotation>),
}

/// One Trotter step precompiled onto a set of basis states: the whole
/// register, or a particle-number sector that the step leaves invariant.
///
/// Consecutive rotations sharing an x-mask and commuting pairwise are
/// fused; their product acts on each pair `(b, b ^ x)` as a single 2x2
/// unitary, and the result equals the term-by-term step exactly.
pub struct CompiledStep {
    states: Vec<u64>,
    sector: Option<SectorBasis>,
    stages: Vec<Stage>,
    identity_phase: Complex64,
}

fn sign(b: u64, z: u64) -> f64 {
    if (b & z).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `G|b> = g(b)|b ^ x>` for `G = sum theta_k P_k` over a fused group.
fn coupling(group: &[(PauliString, f64)], b: u64) -> Complex64 {
    group
        .iter()
        .map(|(p, theta)| {
            crate::hamiltonian::i_pow(p.y_count() as u8) * (theta * sign(b, p.z_mask as u64))
        })
        .sum()
}

fn fuse(rotations: Vec<(PauliString, f64)>) -> Vec<Vec<(PauliString, f64)>> {
    let mut groups: Vec<Vec<(PauliString, f64)>> = Vec::new();
    for (p, theta) in rotations {
        match groups.last_mut() {
            Some(g) if g[0].0.x_mask == p.x_mask && g.iter().all(|(q, _)| q.commutes_with(&p)) => {
                g.push((p, theta))
            }
            _ => groups.push(vec![(p, theta)]),
        }
    }
    groups
}

impl CompiledStep {
    /// Compiles one step of `plan`, restricted to `sector` when given.
    pub fn new(plan: &TrotterPlan, sector: Option<&SectorBasis>) -> Result<Self, DynamicsError> {
        let n = plan.n_qubits();
        if n > 63 {
            return Err(DynamicsError::Capacity {
                requested: n,
                limit: 63,
            });
        }
        let states: Vec<u64> = match sector {
            Some(s) => {
                if s.n_spin_orbitals != n {
                    return Err(DynamicsError::Dimension {
                        expected: n,
                        found: s.n_spin_orbitals,
                    });
                }
                s.states().to_vec()
            }
            None => {
                if n > crate::simulator::MAX_STATE_QUBITS {
                    return Err(DynamicsError::Capacity {
                        requested: n,
                        limit: crate::simulator::MAX_STATE_QUBITS,
                    });
                }
                (0..1u64 << n).collect()
            }
        };
        let rank = |b: u64| -> Option<usize> {
            match sector {
                Some(s) => s.rank(b),
                None => Some(b as usize),
            }
        };

        let mut stages = Vec::new();
        for group in fuse(plan.rotations(plan.step_size())) {
            let x = group[0].0.x_mask as u64;
            if x == 0 {
                let phases = states
                    .iter()
                    .map(|&b| Complex64::from_polar(1.0, -coupling(&group, b).re))
                    .collect();
                stages.push(Stage::Diagonal(phases));
                continue;
            }
            let scale: f64 = group.iter().map(|(_, t)| t.abs()).sum();
            let mut pairs = Vec::new();
            for (i, &b) in states.iter().enumerate() {
                let b2 = b ^ x;
                let g = coupling(&group, b);
                let Some(j) = rank(b2) else {
                    if g.norm() > LEAK_TOLERANCE * scale.max(1.0) {
                        return Err(DynamicsError::Argument(
                            "the step couples the sector to states outside it".into(),
                        ));
                    }
                    continue;
                };
                if b2 < b {
                    continue;
                }
                let g2 = coupling(&group, b2);
                let r = (g.norm() * g2.norm()).sqrt();
                if r == 0.0 {
                    continue;
                }
                let k = Complex64::new(0.0, -r.sin() / r);
                pairs.push(PairRotation {
                    i: i as u32,
                    j: j as u32,
                    cos: r.cos(),
                    to_i: k * g2,
                    to_j: k * g,
                });
            }
            stages.push(Stage::Pairs(pairs));
        }
        Ok(Self {
            states,
            sector: sector.cloned(),
            stages,
            identity_phase: Complex64::from_polar(1.0, -plan.identity_coefficient() * plan.step_size()),
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn sector(&self) -> Option<&SectorBasis> {
        self.sector.as_ref()
    }

    fn check(&self, len: usize) -> Result<(), DynamicsError> {
        if len != self.dim() {
            return Err(DynamicsError::Dimension {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    /// One step applied in place.
    pub fn apply(&self, v: &mut [Complex64]) -> Result<(), DynamicsError> {
        self.check(v.len())?;
        for stage in &self.stages {
            match stage {
                Stage::Diagonal(ph) => v.iter_mut().zip(ph).for_each(|(a, p)| *a *= p),
                Stage::Pairs(pairs) => {
                    for r in pairs {
                        let (i, j) = (r.i as usize, r.j as usize);
                        let (a, b) = (v[i], v[j]);
                        v[i] = a * r.cos + r.to_i * b;
                        v[j] = b * r.cos + r.to_j * a;
                    }
                }
            }
        }
        v.iter_mut().for_each(|a| *a *= self.identity_phase);
        Ok(())
    }

    /// `steps` repeated applications.
    pub fn apply_power(&self, v: &mut [Complex64], steps: u64) -> Result<(), DynamicsError> {
        self.check(v.len())?;
        for _ in 0..steps {
            self.apply(v)?;
        }
        Ok(())
    }

    /// Dense matrix of the step in this subspace's coordinates.
    pub fn dense_unitary(&self) -> Result<DMatrix<Complex64>, DynamicsError> {
        let dim = self.dim();
        if dim > DENSE_STEP_LIMIT {
            return Err(DynamicsError::Capacity {
                requested: dim,
                limit: DENSE_STEP_LIMIT,
            });
        }
        let mut u = DMatrix::zeros(dim, dim);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            self.apply(&mut col)?;
            u.set_column(j, &DVector::from_column_slice(&col));
        }
        Ok(u)
    }

    /// Amplitudes of `state` on this subspace; fails if more than `1e-10`
    /// of the probability lies outside it.
    pub fn restrict(&self, state: &StateVector) -> Result<Vec<Complex64>, DynamicsError> {
        let v: Vec<Complex64> = self
            .states
            .iter()
            .map(|&b| state.amplitudes().get(b as usize).copied().unwrap_or_default())
            .collect();
        let inside: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if (state.norm_sqr() - inside).abs() > 1e-10 {
            return Err(DynamicsError::Argument(
                "state has weight outside the compiled subspace".into(),
            ));
        }
        Ok(v)
    }

    /// Embeds subspace amplitudes into a full register of `n_qubits`.
    pub fn embed(&self, v: &[Complex64], n_qubits: usize) -> Result<StateVector, DynamicsError> {
        self.check(v.len())?;
        let mut s = StateVector::zero(n_qubits)?;
        s.amplitudes_mut()[0] = Complex64::new(0.0, 0.0);
        for (&b, &a) in self.states.iter().zip(v) {
            s.amplitudes_mut()[b as usize] = a;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broombridge::generate_synthetic_problem;
    use crate::dynamics::{trotter_step, TrotterOrder};
    use crate::exactdiag::sector_basis;
    use crate::hamiltonian::{build_fermion_hamiltonian, jordan_wigner};
    use crate::simulator::prepare_basis_state;

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn full_space_matches_term_by_term() {
        let h = crate::dynamics::trotter::tests::random_hamiltonian(4, 12, 21);
        for order in [TrotterOrder::First, TrotterOrder::Second] {
            let plan = TrotterPlan::new(&h, 0.37, order).unwrap();
            let step = CompiledStep::new(&plan, None).unwrap();
            for b in [0u128, 5, 11] {
                let mut s = prepare_basis_state(4, b).unwrap();
                let mut v = step.restrict(&s).unwrap();
                trotter_step(&mut s, &plan).unwrap();
                step.apply(&mut v).unwrap();
                assert!(close(&v, s.amplitudes()));
            }
        }
    }

    #[test]
    fn sector_matches_full_register() {
        let doc = generate_synthetic_problem(3, 3, 3, 1.0).unwrap();
        let h = jordan_wigner(&build_fermion_hamiltonian(&doc.problems[0]).unwrap()).unwrap();
        let sector = sector_basis(6, 3).unwrap();
        for order in [TrotterOrder::First, TrotterOrder::Second] {
            let plan = TrotterPlan::new(&h, 0.5, order).unwrap();
            let step = CompiledStep::new(&plan, Some(&sector)).unwrap();
            let mut s = prepare_basis_state(6, 0b001011).unwrap();
            let mut v = step.restrict(&s).unwrap();
            for _ in 0..3 {
                trotter_step(&mut s, &plan).unwrap();
                step.apply(&mut v).unwrap();
            }
            let embedded = step.embed(&v, 6).unwrap();
            assert!(close(embedded.amplitudes(), s.amplitudes()));
        }
    }

    #[test]
    fn leaking_sector_is_rejected() {
        let h = crate::hamiltonian::PauliHamiltonian::from_labels(0.0, [("XI", 1.0)]).unwrap();
        let plan = TrotterPlan::new(&h, 0.1, TrotterOrder::First).unwrap();
        let sector = sector_basis(2, 1).unwrap();
        assert!(CompiledStep::new(&plan, Some(&sector)).is_err());
    }
}
