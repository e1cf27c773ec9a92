use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sector::{SectorBasis, SectorOperator};
use super::{ExactDiagError, SpectrumResult};
use crate::hamiltonian::FermionHamiltonian;

/// Relative residual tolerance, `||H x - lambda x|| <= tol * ||H||`.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 400;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram-Schmidt against the whole Krylov basis.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize, against: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        reorthogonalize(&mut v, against);
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            return Some(v);
        }
    }
    None
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

/// The `k` lowest eigenpairs of `h` in `basis` by Lanczos with full
/// reorthogonalization, started from a seeded random vector.
///
/// Exactly degenerate eigenvalues are found only as often as rounding or a
/// restart after breakdown exposes them, so a multiplet may be reported
/// with fewer copies than it has.
pub fn lanczos_extremal(
    h: &FermionHamiltonian,
    basis: &SectorBasis,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectrumResult, ExactDiagError> {
    let dim = basis.dim();
    if k == 0 || k > dim {
        return Err(ExactDiagError::Argument(format!(
            "requested {k} eigenvalues from a sector of dimension {dim}"
        )));
    }
    let op = SectorOperator::new(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs: Vec<Vec<f64>> = vec![random_unit(&mut rng, dim, &[]).expect("nonzero start")];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut worst = f64::INFINITY;

    loop {
        let j = vs.len() - 1;
        op.apply(basis, &vs[j], &mut w)?;
        let a = dot(&w, &vs[j]);
        axpy(-a, &vs[j], &mut w);
        if j > 0 && beta[j - 1] != 0.0 {
            axpy(-beta[j - 1], &vs[j - 1], &mut w);
        }
        reorthogonalize(&mut w, &vs);
        alpha.push(a);
        let b = norm(&w);
        let m = alpha.len();

        let check = m >= k && (m < 60 || m % 10 == 0 || m == dim || m >= max_iter);
        if check || b == 0.0 {
            let eig = tridiagonal(&alpha, &beta).symmetric_eigen();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let h_norm = eig
                .eigenvalues
                .iter()
                .fold(0.0f64, |acc, x| acc.max(x.abs()))
                .max(f64::MIN_POSITIVE);
            let complete = m == dim;
            let estimates_ok = m >= k
                && order[..k]
                    .iter()
                    .all(|&i| (b * eig.eigenvectors[(m - 1, i)]).abs() <= tol * h_norm);
            if complete || estimates_ok {
                let result = ritz_pairs(&op, basis, &vs, &eig.eigenvectors, &order[..k])?;
                worst = result.residual_norms.iter().fold(0.0f64, |a, &r| a.max(r));
                if complete || worst <= tol * h_norm {
                    return Ok(result);
                }
            }
            if b <= 1e-12 * h_norm && !complete {
                // invariant subspace found; continue from a fresh direction
                beta.push(0.0);
                match random_unit(&mut rng, dim, &vs) {
                    Some(v) => vs.push(v),
                    None => {
                        return ritz_pairs(&op, basis, &vs, &eig.eigenvectors, &order[..k])
                    }
                }
                if m >= max_iter {
                    break;
                }
                continue;
            }
        }
        if m >= max_iter {
            break;
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        vs.push(next);
    }
    Err(ExactDiagError::Convergence {
        iterations: alpha.len(),
        residual: worst,
    })
}

fn ritz_pairs(
    op: &SectorOperator,
    basis: &SectorBasis,
    vs: &[Vec<f64>],
    s: &DMatrix<f64>,
    which: &[usize],
) -> Result<SpectrumResult, ExactDiagError> {
    let dim = basis.dim();
    let m = s.nrows();
    let mut out = SpectrumResult {
        eigenvalues: Vec::with_capacity(which.len()),
        residual_norms: Vec::with_capacity(which.len()),
        eigenvectors: Vec::with_capacity(which.len()),
    };
    let mut hx = vec![0.0; dim];
    for &i in which {
        let mut x = vec![0.0; dim];
        for (j, v) in vs.iter().take(m).enumerate() {
            axpy(s[(j, i)], v, &mut x);
        }
        let n = norm(&x);
        x.iter_mut().for_each(|e| *e /= n);
        op.apply(basis, &x, &mut hx)?;
        let lambda = dot(&x, &hx);
        axpy(-lambda, &x, &mut hx);
        out.eigenvalues.push(lambda);
        out.residual_norms.push(norm(&hx));
        out.eigenvectors.push(DVector::from_vec(x));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdiag::{dense_sector_spectrum, sector_basis};

    #[test]
    fn number_operator_sector() {
        let mut h = FermionHamiltonian::new(6, 0.0);
        for p in 0..6 {
            h.add_term(1.0, &[p], &[p]).unwrap();
        }
        let b = sector_basis(6, 3).unwrap();
        let r = lanczos_extremal(&h, &b, 1, 1e-9, 100, 1).unwrap();
        assert!((r.eigenvalues[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_sector() {
        let mut h = FermionHamiltonian::new(3, 0.25);
        h.add_term(-0.5, &[0], &[0]).unwrap();
        h.add_term(2.0, &[2, 1], &[1, 2]).unwrap();
        let b = sector_basis(3, 3).unwrap();
        let r = lanczos_extremal(&h, &b, 1, 1e-9, 10, 0).unwrap();
        assert!((r.eigenvalues[0] - (0.25 - 0.5 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn matches_dense_lowest_three() {
        let h = crate::exactdiag::sector::tests::random_conserving(8, 11);
        let b = sector_basis(8, 4).unwrap();
        let dense = dense_sector_spectrum(&h, &b).unwrap();
        let r = lanczos_extremal(&h, &b, 3, 1e-10, 70, 5).unwrap();
        for i in 0..3 {
            assert!(
                (r.eigenvalues[i] - dense.eigenvalues[i]).abs() < 1e-9,
                "{i}: {} vs {}",
                r.eigenvalues[i],
                dense.eigenvalues[i]
            );
        }
    }

    #[test]
    fn too_few_iterations() {
        let h = crate::exactdiag::sector::tests::random_conserving(8, 2);
        let b = sector_basis(8, 4).unwrap();
        assert!(matches!(
            lanczos_extremal(&h, &b, 2, 1e-12, 3, 0),
            Err(ExactDiagError::Convergence { .. })
        ));
    }
}
