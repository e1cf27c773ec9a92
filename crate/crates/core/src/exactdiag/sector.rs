use std::ops::{AddAssign, Mul};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::lanczos::{lanczos_extremal, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::{ExactDiagError, SpectrumResult};
use crate::hamiltonian::{FermionHamiltonian, LadderProduct};

/// Largest sector dimension [`sector_matrix`] will materialize.
pub const DENSE_SECTOR_LIMIT: usize = 4096;

/// Sectors up to this size are diagonalized densely by [`lowest_eigenpairs`].
const AUTO_DENSE_LIMIT: usize = 800;

const MAX_SECTOR_DIMENSION: usize = 1 << 28;

/// Occupation bit-sets with a fixed particle count, in ascending numeric
/// order, with O(k) ranking through the combinatorial number system.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub n_spin_orbitals: usize,
    pub n_particles: usize,
    states: Vec<u64>,
    // binom[n][k] for n <= n_spin_orbitals, k <= n_particles
    binom: Vec<Vec<usize>>,
}

pub fn sector_basis(n_spin_orbitals: usize, n_particles: usize) -> Result<SectorBasis, ExactDiagError> {
    if n_spin_orbitals > 63 {
        return Err(ExactDiagError::Argument(format!(
            "{n_spin_orbitals} spin-orbitals exceed the 63-mode sector limit"
        )));
    }
    if n_particles > n_spin_orbitals {
        return Err(ExactDiagError::Argument(format!(
            "{n_particles} particles do not fit in {n_spin_orbitals} modes"
        )));
    }
    let k = n_particles;
    let mut binom = vec![vec![0usize; k + 1]; n_spin_orbitals + 1];
    for n in 0..=n_spin_orbitals {
        binom[n][0] = 1;
        for j in 1..=k.min(n) {
            binom[n][j] = binom[n - 1][j - 1].saturating_add(if j < n { binom[n - 1][j] } else { 0 });
        }
    }
    let dim = binom[n_spin_orbitals][k];
    if dim > MAX_SECTOR_DIMENSION {
        return Err(ExactDiagError::Argument(format!(
            "sector dimension {dim} exceeds {MAX_SECTOR_DIMENSION}"
        )));
    }

    let mut states = Vec::with_capacity(dim);
    if k == 0 {
        states.push(0);
    } else {
        let end = 1u64 << n_spin_orbitals;
        let mut s: u64 = (1u64 << k) - 1;
        while s < end {
            states.push(s);
            // next integer with the same popcount
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    debug_assert_eq!(states.len(), dim);
    Ok(SectorBasis {
        n_spin_orbitals,
        n_particles,
        states,
        binom,
    })
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    /// Position of `bits` in the basis, if it belongs to the sector.
    pub fn rank(&self, bits: u64) -> Option<usize> {
        if bits.count_ones() as usize != self.n_particles
            || (self.n_spin_orbitals < 64 && bits >> self.n_spin_orbitals != 0)
        {
            return None;
        }
        Some(self.rank_unchecked(bits))
    }

    fn rank_unchecked(&self, mut bits: u64) -> usize {
        let mut r = 0;
        let mut i = 1;
        while bits != 0 {
            let pos = bits.trailing_zeros() as usize;
            r += self.binom[pos][i];
            i += 1;
            bits &= bits - 1;
        }
        r
    }
}

/// Scalars [`apply_in_sector`] can act on.
pub trait Amplitude: Copy + Send + Sync + AddAssign + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Amplitude for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Amplitude for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

struct Group {
    required: u64,
    terms: Vec<(LadderProduct, f64)>,
}

/// A particle-conserving Hamiltonian prepared for repeated sector products.
///
/// Row `i` of `H v` is gathered by applying the adjoint of every term to
/// basis state `i`; terms are grouped by the occupations they require so
/// whole groups are skipped with one mask test.
pub struct SectorOperator {
    n_spin_orbitals: usize,
    identity_offset: f64,
    groups: Vec<Group>,
}

impl SectorOperator {
    pub fn new(h: &FermionHamiltonian) -> Result<Self, ExactDiagError> {
        if !h.conserves_particles() {
            return Err(ExactDiagError::Argument(
                "Hamiltonian does not conserve particle number".into(),
            ));
        }
        if h.n_spin_orbitals > 63 {
            return Err(ExactDiagError::Argument(format!(
                "{} spin-orbitals exceed the 63-mode sector limit",
                h.n_spin_orbitals
            )));
        }
        let mut by_mask: std::collections::BTreeMap<u64, Vec<(LadderProduct, f64)>> =
            Default::default();
        for t in h.terms() {
            let adj = t.product.adjoint();
            let mask = adj.annihilations().iter().fold(0u64, |m, &p| m | 1 << p);
            by_mask.entry(mask).or_default().push((adj, t.coefficient));
        }
        Ok(Self {
            n_spin_orbitals: h.n_spin_orbitals,
            identity_offset: h.identity_offset,
            groups: by_mask
                .into_iter()
                .map(|(required, terms)| Group { required, terms })
                .collect(),
        })
    }

    pub fn apply<T: Amplitude>(
        &self,
        basis: &SectorBasis,
        v: &[T],
        out: &mut [T],
    ) -> Result<(), ExactDiagError> {
        if basis.n_spin_orbitals != self.n_spin_orbitals {
            return Err(ExactDiagError::Argument(format!(
                "basis has {} modes, Hamiltonian has {}",
                basis.n_spin_orbitals, self.n_spin_orbitals
            )));
        }
        for len in [v.len(), out.len()] {
            if len != basis.dim() {
                return Err(ExactDiagError::Dimension {
                    expected: basis.dim(),
                    found: len,
                });
            }
        }
        const CHUNK: usize = 1024;
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (off, slot) in chunk.iter_mut().enumerate() {
                    let i = c * CHUNK + off;
                    let b = basis.states[i];
                    let mut acc = v[i] * self.identity_offset;
                    for g in &self.groups {
                        if b & g.required != g.required {
                            continue;
                        }
                        for (p, coef) in &g.terms {
                            if let Some((b2, sign)) = p.apply_to_bits(b) {
                                acc += v[basis.rank_unchecked(b2)] * (coef * sign);
                            }
                        }
                    }
                    *slot = acc;
                }
            });
        Ok(())
    }
}

/// `H v` within a particle-number sector.
pub fn apply_in_sector<T: Amplitude>(
    h: &FermionHamiltonian,
    basis: &SectorBasis,
    v: &[T],
) -> Result<Vec<T>, ExactDiagError> {
    let op = SectorOperator::new(h)?;
    let mut out = vec![T::zero(); basis.dim()];
    op.apply(basis, v, &mut out)?;
    Ok(out)
}

/// Dense restriction of `h` to the sector, assembled column by column.
pub fn sector_matrix(h: &FermionHamiltonian, basis: &SectorBasis) -> Result<DMatrix<f64>, ExactDiagError> {
    let dim = basis.dim();
    if dim > DENSE_SECTOR_LIMIT {
        return Err(ExactDiagError::Argument(format!(
            "sector dimension {dim} exceeds the dense limit {DENSE_SECTOR_LIMIT}"
        )));
    }
    if !h.conserves_particles() {
        return Err(ExactDiagError::Argument(
            "Hamiltonian does not conserve particle number".into(),
        ));
    }
    let terms: Vec<_> = h.terms().collect();
    let mut m = DMatrix::<f64>::identity(dim, dim) * h.identity_offset;
    for (j, &b) in basis.states().iter().enumerate() {
        for t in &terms {
            if let Some((b2, sign)) = t.product.apply_to_bits(b) {
                let i = basis.rank(b2).expect("particle-conserving term stays in sector");
                m[(i, j)] += sign * t.coefficient;
            }
        }
    }
    Ok(m)
}

/// Full eigendecomposition of the sector restriction, ascending.
pub fn dense_sector_spectrum(
    h: &FermionHamiltonian,
    basis: &SectorBasis,
) -> Result<SpectrumResult, ExactDiagError> {
    let m = sector_matrix(h, basis)?;
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..basis.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = SpectrumResult {
        eigenvalues: Vec::with_capacity(order.len()),
        residual_norms: Vec::with_capacity(order.len()),
        eigenvectors: Vec::with_capacity(order.len()),
    };
    for i in order {
        let x: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let lambda = eig.eigenvalues[i];
        out.residual_norms.push((&m * &x - &x * lambda).norm());
        out.eigenvalues.push(lambda);
        out.eigenvectors.push(x);
    }
    Ok(out)
}

/// The `k` lowest eigenpairs, densely for small sectors and by Lanczos
/// otherwise.
pub fn lowest_eigenpairs(
    h: &FermionHamiltonian,
    basis: &SectorBasis,
    k: usize,
    seed: u64,
) -> Result<SpectrumResult, ExactDiagError> {
    if k == 0 || k > basis.dim() {
        return Err(ExactDiagError::Argument(format!(
            "requested {k} eigenvalues from a sector of dimension {}",
            basis.dim()
        )));
    }
    if basis.dim() <= AUTO_DENSE_LIMIT {
        let mut all = dense_sector_spectrum(h, basis)?;
        all.eigenvalues.truncate(k);
        all.residual_norms.truncate(k);
        all.eigenvectors.truncate(k);
        Ok(all)
    } else {
        lanczos_extremal(h, basis, k, DEFAULT_TOL, DEFAULT_MAX_ITER, seed)
    }
}
