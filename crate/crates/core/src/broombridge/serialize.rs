use serde_yaml::{Mapping, Value};

use super::tokens::VACUUM_MARKER;
use super::{BroombridgeDocument, BroombridgeError, InitialStateAnsatz, ProblemDescription};

/// Writes a document as Broombridge v0.1 YAML.
///
/// Keys appear in a fixed order, integrals are listed once per symmetry class
/// with 1-based indices, and floats are written in shortest round-trip form,
/// so `parse_document(serialize_document(d))` reproduces `d`.
pub fn serialize_document(doc: &BroombridgeDocument) -> Result<String, BroombridgeError> {
    let mut root = Mapping::new();
    let mut format = Mapping::new();
    format.insert("version".into(), doc.format_version.clone().into());
    root.insert("format".into(), format.into());
    for (k, v) in &doc.extra {
        root.insert(k.clone(), v.clone());
    }
    root.insert(
        "integral_sets".into(),
        Value::Sequence(doc.problems.iter().map(problem).collect()),
    );
    serde_yaml::to_string(&Value::Mapping(root))
        .map_err(|e| BroombridgeError::Argument(format!("cannot serialize document: {e}")))
}

fn energy(value: f64) -> Value {
    let mut m = Mapping::new();
    m.insert("units".into(), "hartree".into());
    m.insert("value".into(), value.into());
    m.into()
}

fn index(i: usize) -> Value {
    ((i + 1) as u64).into()
}

fn problem(p: &ProblemDescription) -> Value {
    let mut m = Mapping::new();
    for (k, v) in &p.extra {
        m.insert(k.clone(), v.clone());
    }
    m.insert("n_orbitals".into(), (p.n_orbitals as u64).into());
    m.insert("n_electrons".into(), (p.n_electrons as u64).into());
    m.insert("coulomb_repulsion".into(), energy(p.coulomb_repulsion));
    m.insert("energy_offset".into(), energy(p.energy_offset));
    m.insert("scf_energy".into(), energy(p.scf_energy));
    if let Some(f) = &p.fci_energy {
        let mut fm = Mapping::new();
        fm.insert("units".into(), "hartree".into());
        fm.insert("lower".into(), f.lower.into());
        fm.insert("upper".into(), f.upper.into());
        if let Some(v) = f.value {
            fm.insert("value".into(), v.into());
        }
        m.insert("fci_energy".into(), fm.into());
    }

    let one: Vec<Value> = p
        .one_electron_integrals()
        .map(|([a, b], v)| Value::Sequence(vec![index(*a), index(*b), (*v).into()]))
        .collect();
    let two: Vec<Value> = p
        .two_electron_integrals()
        .map(|([a, b, c, d], v)| {
            Value::Sequence(vec![index(*a), index(*b), index(*c), index(*d), (*v).into()])
        })
        .collect();
    let mut one_block = Mapping::new();
    one_block.insert("units".into(), "hartree".into());
    one_block.insert("format".into(), "sparse".into());
    one_block.insert("values".into(), Value::Sequence(one));
    let mut two_block = Mapping::new();
    two_block.insert("units".into(), "hartree".into());
    two_block.insert("format".into(), "sparse".into());
    two_block.insert("index_convention".into(), "mulliken".into());
    two_block.insert("values".into(), Value::Sequence(two));
    let mut ham = Mapping::new();
    ham.insert("one_electron_integrals".into(), one_block.into());
    ham.insert("two_electron_integrals".into(), two_block.into());
    m.insert("hamiltonian".into(), ham.into());

    if !p.initial_state_suggestions.is_empty() {
        m.insert(
            "initial_state_suggestions".into(),
            Value::Sequence(p.initial_state_suggestions.iter().map(state).collect()),
        );
    }
    m.into()
}

fn state(a: &InitialStateAnsatz) -> Value {
    let mut s = Mapping::new();
    s.insert("label".into(), a.label.clone().into());
    if let Some(e) = a.energy {
        s.insert("energy".into(), energy(e));
    }
    if let Some(method) = &a.method {
        s.insert("method".into(), method.clone().into());
    }
    let terms = a
        .terms
        .iter()
        .map(|t| {
            let mut row = Vec::with_capacity(t.ops.len() + 2);
            row.push(t.coefficient.into());
            row.extend(t.ops.iter().map(|op| Value::from(op.to_string())));
            row.push(VACUUM_MARKER.into());
            Value::Sequence(row)
        })
        .collect();
    s.insert("superposition".into(), Value::Sequence(terms));
    let mut outer = Mapping::new();
    outer.insert("state".into(), s.into());
    outer.into()
}
