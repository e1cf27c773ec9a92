//! Sampling model for projective-mode estimation.
//!
//! Each Hamiltonian eigenstate `E_k` with weight `|<psi|E_k>|^2` is paired
//! with the eigenphase of the Trotter step whose eigenvector overlaps it
//! most. Small subspaces are diagonalized densely. Larger ones use a Lanczos
//! run started from the trial state, whose Ritz weights approximate the
//! spectral weights of `psi`, and a short Arnoldi run of the step from each
//! weighted Ritz vector to find the matching step eigenphase.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::{RpeConfig, RpeError};
use crate::dynamics::{unitary_eigenpairs, CompiledStep};
use crate::hamiltonian::PauliHamiltonian;

/// Subspace dimension up to which the model is built from dense matrices.
pub const PROJECTIVE_DENSE_LIMIT: usize = 600;

const KRYLOV_DIM: usize = 200;
const ARNOLDI_DIM: usize = 24;
const MAX_COMPONENTS: usize = 64;
const MIN_WEIGHT: f64 = 1e-12;

type C = Complex64;

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(w: &mut [C], basis: &[Vec<C>]) {
    for _ in 0..2 {
        for q in basis {
            let c = inner(q, w);
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
    }
}

/// The Hamiltonian as sparse rows over the step's basis states.
struct SubspaceOperator {
    rows: Vec<Vec<(u32, C)>>,
}

impl SubspaceOperator {
    fn new(h: &PauliHamiltonian, step: &CompiledStep) -> Self {
        let states = step.states();
        let rank = |b: u64| match step.sector() {
            Some(s) => s.rank(b),
            None => Some(b as usize),
        };
        let mut by_x: std::collections::BTreeMap<u64, Vec<(_, f64)>> = Default::default();
        for (p, &c) in h.terms() {
            by_x.entry(p.x_mask as u64).or_default().push((*p, c));
        }
        let mut rows: Vec<Vec<(u32, C)>> = vec![Vec::new(); states.len()];
        for (x, group) in &by_x {
            for (i, &b) in states.iter().enumerate() {
                let Some(j) = rank(b ^ x) else { continue };
                let g: C = group
                    .iter()
                    .map(|(p, c)| p.basis_phase(b as u128) * *c)
                    .sum();
                if g.norm() > 0.0 {
                    rows[j].push((i as u32, g));
                }
            }
        }
        Self { rows }
    }

    fn apply(&self, v: &[C], out: &mut [C]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(i, g)| g * v[i as usize]).sum();
        }
    }

    fn dense(&self) -> DMatrix<C> {
        let n = self.rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (j, row) in self.rows.iter().enumerate() {
            for &(i, g) in row {
                m[(j, i as usize)] += g;
            }
        }
        m
    }
}

/// Eigenphase of `step` whose Ritz vector overlaps `start` most, from an
/// Arnoldi run of length `m`.
fn arnoldi_phase(step: &CompiledStep, start: &[C], m: usize) -> Result<f64, RpeError> {
    let m = m.min(step.dim());
    let mut basis: Vec<Vec<C>> = vec![start.to_vec()];
    let mut hess = DMatrix::<C>::zeros(m, m);
    for j in 0..m {
        let mut w = basis[j].clone();
        step.apply(&mut w)?;
        for (i, q) in basis.iter().enumerate() {
            hess[(i, j)] = inner(q, &w);
        }
        orthogonalize(&mut w, &basis);
        let beta = norm(&w);
        if j + 1 == m {
            break;
        }
        if beta < 1e-12 {
            // invariant subspace: eigenphases of the leading block are exact
            let k = j + 1;
            return leading_phase(&hess.view((0, 0), (k, k)).into_owned());
        }
        hess[(j + 1, j)] = C::new(beta, 0.0);
        w.iter_mut().for_each(|a| *a /= beta);
        basis.push(w);
    }
    leading_phase(&hess)
}

fn leading_phase(hess: &DMatrix<C>) -> Result<f64, RpeError> {
    let (q, t) = hess.clone().schur().unpack();
    let n = t.nrows();
    // eigenvectors of the triangular factor by back substitution
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = DVector::<C>::zeros(n);
        y[k] = C::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: C = (i + 1..=k).map(|l| t[(i, l)] * y[l]).sum();
            let d = t[(i, i)] - lambda;
            y[i] = if d.norm() > 1e-14 { -s / d } else { C::new(0.0, 0.0) };
        }
        let z = &q * &y;
        let weight = z[0].norm() / z.norm();
        if weight > best.0 {
            best = (weight, lambda.arg());
        }
    }
    Ok(best.1)
}

/// Eigenphases and Born weights of the trial state.
#[derive(Clone, Debug)]
pub struct ProjectiveModel {
    phases: Vec<f64>,
    weights: Vec<f64>,
}

impl ProjectiveModel {
    pub(super) fn build(
        h: &PauliHamiltonian,
        step: &CompiledStep,
        psi: &[C],
    ) -> Result<Self, RpeError> {
        let op = SubspaceOperator::new(h, step);
        let (weights, phases) = if step.dim() <= PROJECTIVE_DENSE_LIMIT {
            Self::dense_components(&op, step, psi)?
        } else {
            Self::krylov_components(&op, step, psi, ARNOLDI_DIM)?
        };
        let total: f64 = weights.iter().sum();
        if !(total > MIN_WEIGHT) {
            return Err(RpeError::ZeroOverlap);
        }
        Ok(Self {
            phases,
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    fn dense_components(op: &SubspaceOperator, step: &CompiledStep, psi: &[C]) -> Result<(Vec<f64>, Vec<f64>), RpeError> {
        let eig = op.dense().symmetric_eigen();
        let (u_phases, q) = unitary_eigenpairs(&step.dense_unitary()?)?;
        let overlaps = q.adjoint() * &eig.eigenvectors;
        let psi = DVector::from_column_slice(psi);
        let mut weights = Vec::new();
        let mut phases = Vec::new();
        for k in 0..eig.eigenvalues.len() {
            let w = eig.eigenvectors.column(k).dotc(&psi).norm_sqr();
            if w <= MIN_WEIGHT {
                continue;
            }
            let j = overlaps
                .column(k)
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(j, _)| j)
                .unwrap_or(0);
            weights.push(w);
            phases.push(u_phases[j]);
        }
        Ok((weights, phases))
    }

    fn krylov_components(
        op: &SubspaceOperator,
        step: &CompiledStep,
        psi: &[C],
        arnoldi_dim: usize,
    ) -> Result<(Vec<f64>, Vec<f64>), RpeError> {
        let dim = step.dim();
        let m = KRYLOV_DIM.min(dim);
        let n0 = norm(psi);
        let mut basis: Vec<Vec<C>> = vec![psi.iter().map(|a| a / n0).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![C::new(0.0, 0.0); dim];
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            alpha.push(inner(&basis[j], &w).re);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if basis.len() == m || b < 1e-10 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|a| a / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let mut ritz: Vec<(f64, usize)> = (0..k)
            .map(|i| (eig.eigenvectors[(0, i)].powi(2), i))
            .filter(|(w, _)| *w > MIN_WEIGHT)
            .collect();
        ritz.sort_by(|a, b| b.0.total_cmp(&a.0));
        ritz.truncate(MAX_COMPONENTS);

        let mut weights = Vec::new();
        let mut phases = Vec::new();
        for (wt, i) in ritz {
            let mut y = vec![C::new(0.0, 0.0); dim];
            for (l, q) in basis.iter().enumerate() {
                let s = eig.eigenvectors[(l, i)];
                y.iter_mut().zip(q).for_each(|(a, b)| *a += b * s);
            }
            let ny = norm(&y);
            y.iter_mut().for_each(|a| *a /= ny);
            weights.push(wt);
            phases.push(arnoldi_phase(step, &y, arnoldi_dim)?);
        }
        Ok((weights, phases))
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    /// `(weight, step eigenphase)` pairs.
    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().copied().zip(self.phases.iter().copied())
    }

    /// A sampled eigenphase shifted by a uniform energy error within the
    /// nominal target.
    pub(super) fn sample_phase<R: Rng + ?Sized>(&self, config: &RpeConfig, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = self.weights.len() - 1;
        for (k, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = k;
                break;
            }
        }
        let bound = config.error_target();
        let delta = rng.gen_range(-bound..=bound);
        self.phases[pick] - delta * config.step_size
    }
}
