use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ExactDiagError;
use crate::hamiltonian::{FermionHamiltonian, LadderKind};

/// Largest spin-orbital count accepted by the dense constructions.
pub const DENSE_CAPACITY: usize = 10;

fn check_capacity(n: usize) -> Result<(), ExactDiagError> {
    if n > DENSE_CAPACITY {
        return Err(ExactDiagError::Capacity {
            requested: n,
            limit: DENSE_CAPACITY,
        });
    }
    Ok(())
}

/// `Z x .. x Z x s x I x .. x I` on `n` modes with `s` the lowering (or
/// raising) matrix at mode `p`. Mode 0 is the rightmost tensor factor, so
/// it is the least significant bit of the basis index.
pub fn ladder_matrix(kind: LadderKind, p: usize, n: usize) -> Result<DMatrix<f64>, ExactDiagError> {
    check_capacity(n)?;
    if p >= n {
        return Err(ExactDiagError::Argument(format!(
            "mode {p} out of range for {n} modes"
        )));
    }
    let identity = DMatrix::<f64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let local = match kind {
        // |0><1|
        LadderKind::Annihilate => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        LadderKind::Create => DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
    };
    let mut m = DMatrix::<f64>::identity(1, 1);
    for q in (0..n).rev() {
        let factor = if q > p {
            &identity
        } else if q == p {
            &local
        } else {
            &z
        };
        m = m.kronecker(factor);
    }
    Ok(m)
}

/// Column `j` of a matrix with at most one nonzero per column.
type ColumnMap = Vec<Option<(usize, f64)>>;

fn column_map(m: &DMatrix<f64>) -> ColumnMap {
    (0..m.ncols())
        .map(|j| {
            let col = m.column(j);
            let mut hit = None;
            for (i, &v) in col.iter().enumerate() {
                if v != 0.0 {
                    debug_assert!(hit.is_none());
                    hit = Some((i, v));
                }
            }
            hit
        })
        .collect()
}

/// Full Fock-space matrix of `h`, assembled from explicit ladder matrices.
pub fn dense_fermionic_matrix(h: &FermionHamiltonian) -> Result<DMatrix<Complex64>, ExactDiagError> {
    let n = h.n_spin_orbitals;
    check_capacity(n)?;
    let dim = 1usize << n;
    let mut maps = Vec::with_capacity(2 * n);
    for kind in [LadderKind::Create, LadderKind::Annihilate] {
        for p in 0..n {
            maps.push(column_map(&ladder_matrix(kind, p, n)?));
        }
    }
    let map_of = |kind: LadderKind, p: usize| -> &ColumnMap {
        match kind {
            LadderKind::Create => &maps[p],
            LadderKind::Annihilate => &maps[n + p],
        }
    };

    let mut out = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(h.identity_offset, 0.0);
    let ops: Vec<_> = h.terms().collect();
    for term in &ops {
        let factors: Vec<&ColumnMap> = term
            .product
            .operators()
            .map(|(k, p)| map_of(k, p))
            .collect();
        for j in 0..dim {
            let mut row = j;
            let mut amp = term.coefficient;
            let mut alive = true;
            for f in factors.iter().rev() {
                match f[row] {
                    Some((i, v)) => {
                        row = i;
                        amp *= v;
                    }
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                out[(row, j)] += Complex64::new(amp, 0.0);
            }
        }
    }
    Ok(out)
}

/// Total number operator on `n` modes, built from ladder matrices.
pub fn number_operator_matrix(n: usize) -> Result<DMatrix<f64>, ExactDiagError> {
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for p in 0..n {
        m += ladder_matrix(LadderKind::Create, p, n)? * ladder_matrix(LadderKind::Annihilate, p, n)?;
    }
    Ok(m)
}

/// All eigenvalues of [`dense_fermionic_matrix`] in ascending order.
pub fn dense_spectrum(h: &FermionHamiltonian) -> Result<Vec<f64>, ExactDiagError> {
    let m = dense_fermionic_matrix(h)?;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
