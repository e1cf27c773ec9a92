//! Broombridge v0.1 electronic-structure documents.
//!
//! A document carries one or more problem descriptions (`integral_sets`),
//! each with orbital and electron counts, constant energy offsets, sparse
//! one- and two-electron integrals in Mulliken order, and optional trial
//! wavefunctions. Orbital indices are 1-based on disk and 0-based in every
//! type exposed here.

mod keys;
mod parse;
mod serialize;
mod synth;
mod tokens;

use std::collections::BTreeMap;
use std::fmt;

use serde_yaml::Mapping;
use thiserror::Error;

pub use keys::{canonical_one_electron_key, canonical_two_electron_key};
pub use parse::parse_document;
pub use serialize::serialize_document;
pub use synth::{generate_synthetic_problem, HARTREE_FOCK_LABEL};
pub use tokens::{parse_token, LadderToken, TokenKind, VACUUM_MARKER};

pub const FORMAT_VERSION: &str = "0.1";

/// Two integrals in one symmetry class may differ by at most this much.
pub const DUPLICATE_TOLERANCE: f64 = 1e-10;

/// Relative agreement used by [`BroombridgeDocument::canonical_eq`].
pub const ROUND_TRIP_RELATIVE_TOLERANCE: f64 = 1e-12;

/// A validation failure at a document path such as
/// `integral_sets[0].hamiltonian.two_electron_integrals.values[3]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BroombridgeError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema validation failed with {} error(s): {}", .0.len(), join_errors(.0))]
    Schema(Vec<SchemaError>),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl BroombridgeError {
    /// Schema errors carried by this error (empty for other kinds).
    pub fn schema_errors(&self) -> &[SchemaError] {
        match self {
            BroombridgeError::Schema(v) => v,
            _ => &[],
        }
    }
}

fn join_errors(errors: &[SchemaError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct BroombridgeDocument {
    pub format_version: String,
    pub problems: Vec<ProblemDescription>,
    /// Top-level keys other than `format` and `integral_sets`, kept verbatim.
    pub extra: Mapping,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FciEnergy {
    pub lower: f64,
    pub upper: f64,
    pub value: Option<f64>,
}

impl FciEnergy {
    /// The stated value, or the midpoint of the bounds.
    pub fn center(&self) -> f64 {
        self.value.unwrap_or(0.5 * (self.lower + self.upper))
    }
}

/// One coefficient-weighted product of ladder operators acting on the vacuum.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzTerm {
    pub coefficient: f64,
    /// Operators in written order; the rightmost acts on the vacuum first.
    pub ops: Vec<LadderToken>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialStateAnsatz {
    pub label: String,
    pub energy: Option<f64>,
    pub method: Option<String>,
    pub terms: Vec<AnsatzTerm>,
}

/// One `integral_sets` entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemDescription {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub coulomb_repulsion: f64,
    pub energy_offset: f64,
    pub scf_energy: f64,
    pub fci_energy: Option<FciEnergy>,
    one_electron: BTreeMap<[usize; 2], f64>,
    two_electron: BTreeMap<[usize; 4], f64>,
    pub initial_state_suggestions: Vec<InitialStateAnsatz>,
    /// Keys not interpreted here (geometry, basis_set, metadata, ...), kept verbatim.
    pub extra: Mapping,
}

impl ProblemDescription {
    /// An empty problem; integrals are added with the `insert_*` methods.
    pub fn new(n_orbitals: usize, n_electrons: usize) -> Self {
        Self {
            n_orbitals,
            n_electrons,
            coulomb_repulsion: 0.0,
            energy_offset: 0.0,
            scf_energy: 0.0,
            fci_energy: None,
            one_electron: BTreeMap::new(),
            two_electron: BTreeMap::new(),
            initial_state_suggestions: Vec::new(),
            extra: Mapping::new(),
        }
    }

    /// Canonical 0-based one-electron entries `([p, q], h_pq)` with `p <= q`.
    pub fn one_electron_integrals(&self) -> impl Iterator<Item = (&[usize; 2], &f64)> {
        self.one_electron.iter()
    }

    /// Canonical 0-based two-electron entries `([p, q, r, s], (pq|rs))`.
    pub fn two_electron_integrals(&self) -> impl Iterator<Item = (&[usize; 4], &f64)> {
        self.two_electron.iter()
    }

    pub fn one_electron_len(&self) -> usize {
        self.one_electron.len()
    }

    pub fn two_electron_len(&self) -> usize {
        self.two_electron.len()
    }

    /// Sets `h_pq` (0-based), replacing any value in the same class.
    pub fn insert_one_electron(&mut self, p: usize, q: usize, value: f64) {
        self.one_electron
            .insert(canonical_one_electron_key([p, q]), value);
    }

    /// Sets `(pq|rs)` (0-based), replacing any value in the same class.
    pub fn insert_two_electron(&mut self, key: [usize; 4], value: f64) {
        self.two_electron
            .insert(canonical_two_electron_key(key), value);
    }

    pub fn one_electron(&self, p: usize, q: usize) -> Option<f64> {
        self.one_electron
            .get(&canonical_one_electron_key([p, q]))
            .copied()
    }

    pub fn two_electron(&self, key: [usize; 4]) -> Option<f64> {
        self.two_electron
            .get(&canonical_two_electron_key(key))
            .copied()
    }

    pub fn ansatz(&self, label: &str) -> Option<&InitialStateAnsatz> {
        self.initial_state_suggestions
            .iter()
            .find(|a| a.label == label)
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_orbitals
    }

    /// Equality of the scientific content with scalars compared to
    /// [`ROUND_TRIP_RELATIVE_TOLERANCE`].
    pub fn canonical_eq(&self, other: &Self) -> bool {
        self.n_orbitals == other.n_orbitals
            && self.n_electrons == other.n_electrons
            && close(self.coulomb_repulsion, other.coulomb_repulsion)
            && close(self.energy_offset, other.energy_offset)
            && close(self.scf_energy, other.scf_energy)
            && match (&self.fci_energy, &other.fci_energy) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    close(a.lower, b.lower)
                        && close(a.upper, b.upper)
                        && close_opt(a.value, b.value)
                }
                _ => false,
            }
            && maps_close(&self.one_electron, &other.one_electron)
            && maps_close(&self.two_electron, &other.two_electron)
            && self.initial_state_suggestions.len() == other.initial_state_suggestions.len()
            && self
                .initial_state_suggestions
                .iter()
                .zip(&other.initial_state_suggestions)
                .all(|(a, b)| {
                    a.label == b.label
                        && a.method == b.method
                        && close_opt(a.energy, b.energy)
                        && a.terms.len() == b.terms.len()
                        && a.terms.iter().zip(&b.terms).all(|(x, y)| {
                            close(x.coefficient, y.coefficient) && x.ops == y.ops
                        })
                })
            && self.extra == other.extra
    }
}

impl BroombridgeDocument {
    pub fn new(problems: Vec<ProblemDescription>) -> Self {
        Self {
            format_version: FORMAT_VERSION.to_string(),
            problems,
            extra: Mapping::new(),
        }
    }

    pub fn canonical_eq(&self, other: &Self) -> bool {
        self.format_version == other.format_version
            && self.extra == other.extra
            && self.problems.len() == other.problems.len()
            && self
                .problems
                .iter()
                .zip(&other.problems)
                .all(|(a, b)| a.canonical_eq(b))
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= ROUND_TRIP_RELATIVE_TOLERANCE * a.abs().max(b.abs())
}

fn close_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => close(a, b),
        _ => false,
    }
}

fn maps_close<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|((ka, va), (kb, vb))| ka == kb && close(*va, *vb))
}
