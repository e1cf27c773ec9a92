use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_yaml::Mapping;

use super::keys::canonical_two_electron_key;
use super::tokens::{LadderToken, TokenKind};
use super::{
    AnsatzTerm, BroombridgeDocument, BroombridgeError, FciEnergy, InitialStateAnsatz,
    ProblemDescription,
};
use crate::hamiltonian::{
    build_fermion_hamiltonian, jordan_wigner_with_limit, Spin, SpinOrbital, MAX_PAULI_QUBITS,
};

/// Label of the single-determinant trial state in synthetic documents.
pub const HARTREE_FOCK_LABEL: &str = "|G>";

/// A random but valid single-problem document.
///
/// A `density` fraction of the canonical one- and two-electron classes
/// receives a value uniform in [-1, 1] hartree. The trial state fills the
/// lowest orbitals (alpha first), `scf_energy` is its expectation value and
/// the FCI bounds are `c ± L1` where `c` is the identity coefficient and `L1`
/// the one-norm of the Jordan-Wigner image.
pub fn generate_synthetic_problem(
    seed: u64,
    n_orbitals: usize,
    n_electrons: usize,
    density: f64,
) -> Result<BroombridgeDocument, BroombridgeError> {
    if n_orbitals == 0 || n_electrons == 0 {
        return Err(BroombridgeError::Argument(
            "n_orbitals and n_electrons must be positive".into(),
        ));
    }
    if n_electrons > 2 * n_orbitals {
        return Err(BroombridgeError::Argument(format!(
            "{n_electrons} electrons do not fit in {} spin-orbitals",
            2 * n_orbitals
        )));
    }
    if 2 * n_orbitals > MAX_PAULI_QUBITS {
        return Err(BroombridgeError::Argument(format!(
            "at most {} spatial orbitals are supported",
            MAX_PAULI_QUBITS / 2
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(BroombridgeError::Argument(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_orbitals;
    let mut p = ProblemDescription::new(n, n_electrons);
    p.coulomb_repulsion = rng.gen_range(0.0..1.0);

    let one_classes: Vec<[usize; 2]> = (0..n)
        .flat_map(|a| (a..n).map(move |b| [a, b]))
        .collect();
    let mut two_classes = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let k = [a, b, c, d];
                    if canonical_two_electron_key(k) == k {
                        two_classes.push(k);
                    }
                }
            }
        }
    }
    let pick = |rng: &mut ChaCha8Rng, count: usize| -> Vec<usize> {
        let amount = ((density * count as f64).round() as usize).min(count);
        let mut chosen = sample(rng, count, amount).into_vec();
        chosen.sort_unstable();
        chosen
    };
    for i in pick(&mut rng, one_classes.len()) {
        let [a, b] = one_classes[i];
        p.insert_one_electron(a, b, rng.gen_range(-1.0..=1.0));
    }
    for i in pick(&mut rng, two_classes.len()) {
        p.insert_two_electron(two_classes[i], rng.gen_range(-1.0..=1.0));
    }

    let n_alpha = n_electrons.div_ceil(2);
    let n_beta = n_electrons / 2;
    let occupied: Vec<SpinOrbital> = (0..n_alpha)
        .map(|k| SpinOrbital::new(k, Spin::Alpha))
        .chain((0..n_beta).map(|k| SpinOrbital::new(k, Spin::Beta)))
        .collect();
    let hf_bits: u128 = occupied
        .iter()
        .fold(0, |acc, so| acc | 1u128 << so.flat_index(n));

    let pauli = build_fermion_hamiltonian(&p)
        .and_then(|h| jordan_wigner_with_limit(&h, MAX_PAULI_QUBITS))
        .map_err(|e| BroombridgeError::Argument(e.to_string()))?;
    p.scf_energy = pauli.diagonal_element(hf_bits);
    let l1 = pauli.l1_norm();
    let c = pauli.identity_coefficient;
    p.fci_energy = Some(FciEnergy {
        lower: c - l1,
        upper: c + l1,
        value: None,
    });

    p.initial_state_suggestions.push(InitialStateAnsatz {
        label: HARTREE_FOCK_LABEL.to_string(),
        energy: Some(p.scf_energy),
        method: Some("hartree-fock".to_string()),
        terms: vec![AnsatzTerm {
            coefficient: 1.0,
            ops: occupied
                .iter()
                .map(|so| LadderToken {
                    orbital: so.orbital,
                    spin: so.spin,
                    kind: TokenKind::Raise,
                })
                .collect(),
        }],
    });

    let mut meta = Mapping::new();
    meta.insert("generator".into(), "synthetic".into());
    meta.insert("seed".into(), seed.into());
    meta.insert("density".into(), density.into());
    p.extra.insert("metadata".into(), meta.into());

    Ok(BroombridgeDocument::new(vec![p]))
}
