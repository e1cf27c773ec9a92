use proptest::prelude::*;

use qchem_core::broombridge::{
    generate_synthetic_problem, parse_document, serialize_document, AnsatzTerm, BroombridgeDocument,
    InitialStateAnsatz, LadderToken, ProblemDescription, TokenKind,
};
use qchem_core::hamiltonian::{Spin, SpinOrbital};
use qchem_core::simulator::{prepare_ansatz, prepare_basis_state, SimulatorError};

const LIH: &str = include_str!("fixtures/lih_sto3g.yaml");

fn raise(orbital: usize, spin: Spin) -> LadderToken {
    LadderToken {
        orbital,
        spin,
        kind: TokenKind::Raise,
    }
}

fn with_ansatz(n_orbitals: usize, terms: Vec<AnsatzTerm>) -> ProblemDescription {
    let mut p = ProblemDescription::new(n_orbitals, 2);
    p.initial_state_suggestions = vec![InitialStateAnsatz {
        label: "|T>".into(),
        energy: None,
        method: None,
        terms,
    }];
    p
}

/// Sign of a+_{q1} ... a+_{qk} |vacuum> relative to the determinant with
/// creators in ascending order: parity of the inversions.
fn creation_sign(qubits: &[usize]) -> f64 {
    let inversions = (0..qubits.len())
        .flat_map(|i| (i + 1..qubits.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| qubits[i] > qubits[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[test]
fn lih_excited_ansatz() {
    let doc = parse_document(LIH).unwrap();
    let prepared = prepare_ansatz(&doc.problems[0], "|E1>").unwrap();
    assert!((prepared.state.norm_sqr() - 1.0).abs() < 1e-12);
    assert_eq!(prepared.configuration_count, 5);
    let norm = (2.0 * 0.889f64.powi(2) + 2.0 * 0.221f64.powi(2) + 0.324f64.powi(2)).sqrt();
    let mut magnitudes: Vec<f64> = prepared.state.amplitudes().iter().map(|a| a.norm()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    for (got, raw) in magnitudes.iter().zip([0.889, 0.889, 0.324, 0.221, 0.221]) {
        assert!((got - raw / norm).abs() < 1e-12);
    }
    assert!((magnitudes[0] - 0.6659).abs() < 1e-3);
}

#[test]
fn double_creation_vanishes() {
    let p = with_ansatz(
        2,
        vec![AnsatzTerm {
            coefficient: 1.0,
            ops: vec![raise(0, Spin::Alpha), raise(0, Spin::Alpha)],
        }],
    );
    assert!(matches!(prepare_ansatz(&p, "|T>"), Err(SimulatorError::ZeroNorm)));
    assert!(matches!(prepare_ansatz(&p, "|missing>"), Err(SimulatorError::UnknownLabel(_))));
}

proptest! {
    #[test]
    fn single_determinant_matches_basis_state(order in Just(vec![0usize, 1, 2, 3, 4, 5]).prop_shuffle(), k in 1usize..=6) {
        let n = 3;
        let chosen = &order[..k];
        let ops: Vec<LadderToken> = chosen
            .iter()
            .map(|&q| {
                let so = SpinOrbital::from_flat_index(q, n);
                raise(so.orbital, so.spin)
            })
            .collect();
        // a+_{q1} a+_{q2} ... acts right to left, so the last token is applied first
        let flat: Vec<usize> = ops.iter().map(|t| t.spin_orbital().flat_index(n)).collect();
        let p = with_ansatz(n, vec![AnsatzTerm { coefficient: 0.3, ops }]);
        let prepared = prepare_ansatz(&p, "|T>").unwrap();
        let occupation: u128 = chosen.iter().map(|q| 1u128 << q).sum();
        let basis = prepare_basis_state(2 * n, occupation).unwrap();
        let sign = creation_sign(&flat);
        for (a, b) in prepared.state.amplitudes().iter().zip(basis.amplitudes()) {
            prop_assert!((a - b * sign).norm() < 1e-12);
        }
    }

    #[test]
    fn coefficient_scale_is_irrelevant(alpha in prop_oneof![-50.0..-0.01f64, 0.01..50.0f64]) {
        let doc = parse_document(LIH).unwrap();
        let mut scaled = doc.problems[0].clone();
        for a in &mut scaled.initial_state_suggestions {
            for t in &mut a.terms {
                t.coefficient *= alpha;
            }
        }
        let reference = prepare_ansatz(&doc.problems[0], "|E1>").unwrap();
        let got = prepare_ansatz(&scaled, "|E1>").unwrap();
        for (a, b) in got.state.amplitudes().iter().zip(reference.state.amplitudes()) {
            prop_assert!((a - b * alpha.signum()).norm() < 1e-12);
        }
    }

    #[test]
    fn synthetic_documents_round_trip(seed in any::<u64>(), n in 1usize..=4, e in 1usize..=8, density in 0.05f64..=1.0) {
        prop_assume!(e <= 2 * n);
        let doc = generate_synthetic_problem(seed, n, e, density).unwrap();
        let text = serialize_document(&doc).unwrap();
        let back = parse_document(&text).unwrap();
        prop_assert!(back.canonical_eq(&doc));
        prop_assert_eq!(serialize_document(&back).unwrap(), text);
    }

    #[test]
    fn edited_lih_round_trips(scale in 0.5f64..2.0, which in 0usize..12) {
        let mut doc = parse_document(LIH).unwrap();
        let p = &mut doc.problems[0];
        let keys: Vec<[usize; 2]> = p.one_electron_integrals().map(|(k, _)| *k).collect();
        let [a, b] = keys[which % keys.len()];
        p.insert_one_electron(a, b, p.one_electron(a, b).unwrap() * scale);
        p.scf_energy *= scale;
        let back = parse_document(&serialize_document(&doc).unwrap()).unwrap();
        prop_assert!(back.canonical_eq(&doc));
        prop_assert!(!back.canonical_eq(&BroombridgeDocument::new(vec![])));
    }
}
