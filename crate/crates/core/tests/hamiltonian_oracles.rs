use qchem_core::broombridge::{generate_synthetic_problem, parse_document};
use qchem_core::exactdiag::{
    dense_fermionic_matrix, dense_spectrum, ladder_matrix, lowest_eigenpairs,
    number_operator_matrix, sector_basis,
};
use qchem_core::hamiltonian::{
    build_fermion_hamiltonian, jordan_wigner, FermionHamiltonian, LadderKind, PauliString,
};

const LIH: &str = include_str!("fixtures/lih_sto3g.yaml");

#[test]
fn lih_ground_energy_matches_reference_fci() {
    let doc = parse_document(LIH).unwrap();
    let p = &doc.problems[0];
    let h = build_fermion_hamiltonian(p).unwrap();
    assert_eq!(h.n_spin_orbitals, 12);
    assert!(h.is_hermitian(1e-14));
    assert!(h.conserves_particles());
    let basis = sector_basis(12, 4).unwrap();
    let r = lowest_eigenpairs(&h, &basis, 1, 0).unwrap();
    let fci = p.fci_energy.unwrap().value.unwrap();
    assert!(
        (r.eigenvalues[0] - fci).abs() < 1e-8,
        "{} vs {fci}",
        r.eigenvalues[0]
    );
}

#[test]
fn lih_hartree_fock_energy_matches_scf() {
    let doc = parse_document(LIH).unwrap();
    let p = &doc.problems[0];
    let pauli = jordan_wigner(&build_fermion_hamiltonian(p).unwrap()).unwrap();
    // alpha orbitals 1,2 and beta orbitals 1,2 occupied
    let hf: u128 = 0b11 | 0b11 << 6;
    assert!((pauli.diagonal_element(hf) - p.scf_energy).abs() < 1e-8);
}

fn spin_z(n_orbitals: usize) -> FermionHamiltonian {
    let mut sz = FermionHamiltonian::new(2 * n_orbitals, 0.0);
    for k in 0..n_orbitals {
        sz.add_term(0.5, &[k], &[k]).unwrap();
        sz.add_term(-0.5, &[k + n_orbitals], &[k + n_orbitals]).unwrap();
    }
    sz
}

#[test]
fn synthetic_hamiltonians_commute_with_number_and_spin() {
    for seed in 0..4 {
        let doc = generate_synthetic_problem(seed, 3, 3, 1.0).unwrap();
        let h = build_fermion_hamiltonian(&doc.problems[0]).unwrap();
        assert!(h.is_hermitian(1e-14));
        assert!(h.conserves_particles());
        let m = dense_fermionic_matrix(&h).unwrap().map(|c| c.re);
        let n = number_operator_matrix(6).unwrap();
        assert!((&m * &n - &n * &m).norm() < 1e-12);
        let sz = dense_fermionic_matrix(&spin_z(3)).unwrap().map(|c| c.re);
        assert!((&m * &sz - &sz * &m).norm() < 1e-12);
    }
}

#[test]
fn jordan_wigner_preserves_spectrum() {
    for seed in 0..3 {
        let doc = generate_synthetic_problem(100 + seed, 2, 2, 1.0).unwrap();
        let h = build_fermion_hamiltonian(&doc.problems[0]).unwrap();
        let pauli = jordan_wigner(&h).unwrap();
        let mut jw: Vec<f64> = pauli.to_dense().symmetric_eigenvalues().iter().copied().collect();
        jw.sort_by(f64::total_cmp);
        let exact = dense_spectrum(&h).unwrap();
        for (a, b) in jw.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn jordan_wigner_matrix_matches_ladder_construction() {
    let doc = generate_synthetic_problem(5, 2, 2, 1.0).unwrap();
    let h = build_fermion_hamiltonian(&doc.problems[0]).unwrap();
    let a = jordan_wigner(&h).unwrap().to_dense();
    let b = dense_fermionic_matrix(&h).unwrap();
    assert!((a - b).norm() < 1e-12);
}

#[test]
fn ladder_images_satisfy_anticommutation() {
    let n = 3;
    for p in 0..n {
        for q in 0..n {
            let jw_ann = |p: usize| {
                qchem_core::hamiltonian::ladder_operator_paulis(LadderKind::Annihilate, p)
                    .iter()
                    .map(|(c, s): &(num_complex::Complex64, PauliString)| s.to_dense(n) * *c)
                    .fold(nalgebra::DMatrix::zeros(1 << n, 1 << n), |acc, m| acc + m)
            };
            let ap = jw_ann(p);
            let aq = jw_ann(q);
            let cq = aq.adjoint();
            let anti = &ap * &cq + &cq * &ap;
            let expected = if p == q {
                nalgebra::DMatrix::identity(1 << n, 1 << n)
            } else {
                nalgebra::DMatrix::zeros(1 << n, 1 << n)
            };
            assert!((anti - expected).norm() < 1e-14);
            assert!((&ap * &aq + &aq * &ap).norm() < 1e-14);
            let lad = ladder_matrix(LadderKind::Annihilate, p, n)
                .unwrap()
                .map(|x| num_complex::Complex64::new(x, 0.0));
            assert!((ap - lad).norm() < 1e-14);
        }
    }
}
