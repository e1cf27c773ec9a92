//! Second-quantized electronic Hamiltonians over spin-orbitals.

use std::collections::{BTreeMap, BTreeSet};

use super::{HamiltonianError, Spin, SpinOrbital};
use crate::broombridge::ProblemDescription;

/// Coefficients below this magnitude left over from symmetrization are dropped.
pub const BUILD_DROP_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// A canonical normal-ordered product of ladder operators over flat
/// spin-orbital indices.
///
/// Creations come first in strictly descending index order, annihilations
/// follow in strictly ascending order: `a+_{c0} a+_{c1} .. a_{a0} a_{a1} ..`
/// with `c0 > c1 > ..` and `a0 < a1 < ..`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadderProduct {
    creations: Vec<usize>,
    annihilations: Vec<usize>,
}

impl LadderProduct {
    /// Canonicalizes `a+_{creations[0]} .. a_{annihilations[0]} ..`, returning
    /// the permutation sign, or `None` when an index repeats within a group
    /// (the product vanishes).
    pub fn canonicalize(creations: &[usize], annihilations: &[usize]) -> Option<(f64, Self)> {
        let (s1, creations) = sort_with_sign(creations, true)?;
        let (s2, annihilations) = sort_with_sign(annihilations, false)?;
        Some((
            s1 * s2,
            Self {
                creations,
                annihilations,
            },
        ))
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn creations(&self) -> &[usize] {
        &self.creations
    }

    pub fn annihilations(&self) -> &[usize] {
        &self.annihilations
    }

    pub fn is_identity(&self) -> bool {
        self.creations.is_empty() && self.annihilations.is_empty()
    }

    /// Operators in application-text order (leftmost first).
    pub fn operators(&self) -> impl Iterator<Item = (LadderKind, usize)> + '_ {
        self.creations
            .iter()
            .map(|&i| (LadderKind::Create, i))
            .chain(self.annihilations.iter().map(|&i| (LadderKind::Annihilate, i)))
    }

    /// Canonical form of the Hermitian adjoint. Reversal maps a descending
    /// creation list to an ascending annihilation list and vice versa, so
    /// no sign arises.
    pub fn adjoint(&self) -> Self {
        Self {
            creations: self.annihilations.iter().rev().copied().collect(),
            annihilations: self.creations.iter().rev().copied().collect(),
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        self.creations
            .iter()
            .chain(&self.annihilations)
            .copied()
            .max()
    }

    /// Acts on an occupation bit-set, returning the new bit-set and sign.
    /// Qubit/spin-orbital 0 is the least significant bit.
    pub fn apply_to_bits(&self, bits: u64) -> Option<(u64, f64)> {
        let mut b = bits;
        let mut parity = 0u32;
        for &p in self.annihilations.iter().rev() {
            let m = 1u64 << p;
            if b & m == 0 {
                return None;
            }
            parity += (b & (m - 1)).count_ones();
            b &= !m;
        }
        for &p in self.creations.iter().rev() {
            let m = 1u64 << p;
            if b & m != 0 {
                return None;
            }
            parity += (b & (m - 1)).count_ones();
            b |= m;
        }
        Some((b, if parity % 2 == 0 { 1.0 } else { -1.0 }))
    }
}

fn sort_with_sign(idx: &[usize], descending: bool) -> Option<(f64, Vec<usize>)> {
    let mut v = idx.to_vec();
    let mut swaps = 0usize;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 {
            let out_of_order = if descending {
                v[j - 1] < v[j]
            } else {
                v[j - 1] > v[j]
            };
            if v[j - 1] == v[j] {
                return None;
            }
            if !out_of_order {
                break;
            }
            v.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((if swaps % 2 == 0 { 1.0 } else { -1.0 }, v))
}

/// One coefficient-weighted ladder product.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionTerm {
    pub coefficient: f64,
    pub product: LadderProduct,
}

/// `identity_offset + sum_k c_k * product_k` over `n_spin_orbitals`
/// spin-orbitals in block ordering (all alpha, then all beta).
#[derive(Clone, Debug, PartialEq)]
pub struct FermionHamiltonian {
    pub n_spin_orbitals: usize,
    pub identity_offset: f64,
    terms: BTreeMap<LadderProduct, f64>,
}

impl FermionHamiltonian {
    pub fn new(n_spin_orbitals: usize, identity_offset: f64) -> Self {
        Self {
            n_spin_orbitals,
            identity_offset,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `c * a+_{creations..} a_{annihilations..}`. The operator groups
    /// may be in any order; the sign of sorting is folded into `c`.
    pub fn add_term(
        &mut self,
        coefficient: f64,
        creations: &[usize],
        annihilations: &[usize],
    ) -> Result<(), HamiltonianError> {
        if let Some(&bad) = creations
            .iter()
            .chain(annihilations)
            .find(|&&i| i >= self.n_spin_orbitals)
        {
            return Err(HamiltonianError::Index {
                index: bad,
                limit: self.n_spin_orbitals,
            });
        }
        let Some((sign, product)) = LadderProduct::canonicalize(creations, annihilations) else {
            return Ok(());
        };
        if product.is_identity() {
            self.identity_offset += coefficient;
        } else {
            *self.terms.entry(product).or_insert(0.0) += sign * coefficient;
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = FermionTerm> + '_ {
        self.terms.iter().map(|(p, &c)| FermionTerm {
            coefficient: c,
            product: p.clone(),
        })
    }

    pub fn coefficient(&self, product: &LadderProduct) -> f64 {
        self.terms.get(product).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops terms with `|c| < threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.abs() >= threshold);
    }

    /// Every term's adjoint is present with an equal coefficient.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms
            .iter()
            .all(|(p, c)| (self.coefficient(&p.adjoint()) - c).abs() <= tol)
    }

    pub fn conserves_particles(&self) -> bool {
        self.terms
            .keys()
            .all(|p| p.creations.len() == p.annihilations.len())
    }
}

/// Distinct index images of a real Mulliken two-electron integral `(pq|rs)`.
pub(crate) fn mulliken_images(k: [usize; 4]) -> BTreeSet<[usize; 4]> {
    let [p, q, r, s] = k;
    [
        [p, q, r, s],
        [q, p, r, s],
        [p, q, s, r],
        [q, p, s, r],
        [r, s, p, q],
        [s, r, p, q],
        [r, s, q, p],
        [s, r, q, p],
    ]
    .into_iter()
    .collect()
}

/// Builds the spin-orbital Hamiltonian of a validated problem.
///
/// ```text
/// H = sum_{pq,s} h_pq a+_{ps} a_{qs}
///   + 1/2 sum_{pqrs,s,t} (pq|rs) a+_{ps} a+_{rt} a_{st} a_{qs}
///   + coulomb_repulsion + energy_offset
/// ```
///
/// This is the single place the chemist-notation integrals are reindexed:
/// the stored value `(pq|rs)` is the coefficient of
/// `a+_{p,s} a+_{r,t} a_{s,t} a_{q,s}` (density `pq` on electron 1, `rs` on
/// electron 2). Every one of the eight real-orbital symmetry images of a
/// stored class enters the sum exactly once.
pub fn build_fermion_hamiltonian(
    problem: &ProblemDescription,
) -> Result<FermionHamiltonian, HamiltonianError> {
    let n = problem.n_orbitals;
    let mut h = FermionHamiltonian::new(
        2 * n,
        problem.coulomb_repulsion + problem.energy_offset,
    );
    let spin_orbital = |orbital: usize, spin: Spin| SpinOrbital::new(orbital, spin).flat_index(n);
    let check = |i: usize| {
        if i >= n {
            Err(HamiltonianError::Index { index: i, limit: n })
        } else {
            Ok(())
        }
    };

    for (&[p, q], &v) in problem.one_electron_integrals() {
        check(p)?;
        check(q)?;
        let images: BTreeSet<[usize; 2]> = [[p, q], [q, p]].into_iter().collect();
        for [a, b] in images {
            for spin in Spin::BOTH {
                h.add_term(v, &[spin_orbital(a, spin)], &[spin_orbital(b, spin)])?;
            }
        }
    }

    for (&key, &v) in problem.two_electron_integrals() {
        for &i in &key {
            check(i)?;
        }
        for [p, q, r, s] in mulliken_images(key) {
            for s1 in Spin::BOTH {
                for s2 in Spin::BOTH {
                    h.add_term(
                        0.5 * v,
                        &[spin_orbital(p, s1), spin_orbital(r, s2)],
                        &[spin_orbital(s, s2), spin_orbital(q, s1)],
                    )?;
                }
            }
        }
    }
    h.prune(BUILD_DROP_THRESHOLD);
    Ok(h)
}
