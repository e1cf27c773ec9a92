use proptest::prelude::*;
use qchem_core::resources::*;

fn step() -> impl Strategy<Value = StepCost> {
    (1u64..1000, 0u64..10_000_000, 0u64..100).prop_map(|(qubits, t_gates, rz_rotations)| StepCost {
        qubits,
        t_gates,
        rz_rotations,
    })
}

proptest! {
    #[test]
    fn queries_are_scale_invariant(lambda in 0.01f64..5000.0, delta in 1e-4f64..1.0, c in 0.01f64..100.0, f in 1u8..=2) {
        prop_assert_eq!(
            queries_for_precision(lambda, delta, f).unwrap(),
            queries_for_precision(c * lambda, c * delta, f).unwrap()
        );
    }

    #[test]
    fn total_is_monotone(s in step(), lambda in 1.0f64..2000.0, delta in 1e-4f64..1e-2, bump in 1u64..1000) {
        let base = estimate_total(&s, lambda, delta, 1).unwrap().total_t;
        prop_assert!(estimate_total(&s, lambda, 2.0 * delta, 1).unwrap().total_t <= base);
        prop_assert!(estimate_total(&s, lambda * 1.5, delta, 1).unwrap().total_t >= base);
        for bigger in [
            StepCost { t_gates: s.t_gates + bump, ..s },
            StepCost { rz_rotations: s.rz_rotations + bump, ..s },
            StepCost { qubits: s.qubits + bump, ..s },
        ] {
            let e = estimate_total(&bigger, lambda, delta, 1).unwrap();
            prop_assert!(e.total_t >= base);
            prop_assert_eq!(e.total_t, e.queries * bigger.t_gates + e.synthesis_t);
        }
    }
}

#[test]
fn generic_and_optimized_ring_rows() {
    let reg = CostModelRegistry::bundled();
    assert_eq!(reg.load_step_cost(&CostRequest::Table("ring-50-optimized")).unwrap().rz_rotations, 18);
    assert_eq!(reg.load_step_cost(&CostRequest::Table("ring-50-generic")).unwrap().rz_rotations, 17_931_406);
    assert_eq!(reg.records().len(), 12);
}

#[test]
fn user_records_extend_the_table() {
    let mut reg = CostModelRegistry::bundled();
    reg.add_records(parse_cost_records("name,qubits,t_gates,rz_rotations\ntoy,10,100,2\n").unwrap());
    let cost = reg.load_step_cost(&CostRequest::Table("toy")).unwrap();
    let e = estimate_total(&cost, 1.0, 0.5, 1).unwrap();
    // 2 queries, 4 rotations: ceil(12 log2 8) = 36
    assert_eq!((e.queries, e.synthesis_t, e.total_t), (2, 36, 236));
}
