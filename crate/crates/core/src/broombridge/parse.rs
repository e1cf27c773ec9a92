use std::collections::{BTreeMap, HashMap, HashSet};

use serde_yaml::{Mapping, Value};

use super::keys::{canonical_one_electron_key, canonical_two_electron_key};
use super::tokens::{parse_token, VACUUM_MARKER};
use super::{
    AnsatzTerm, BroombridgeDocument, BroombridgeError, FciEnergy, InitialStateAnsatz,
    ProblemDescription, SchemaError, DUPLICATE_TOLERANCE, FORMAT_VERSION,
};

/// Parses and validates a Broombridge v0.1 document.
///
/// Every schema violation found is reported, each with the path of the
/// offending key or list entry.
pub fn parse_document(text: &str) -> Result<BroombridgeDocument, BroombridgeError> {
    let root: Value =
        serde_yaml::from_str(text).map_err(|e| BroombridgeError::Syntax(e.to_string()))?;
    let mut v = Validator::default();
    let doc = v.document(&root);
    match doc {
        Some(doc) if v.errors.is_empty() => Ok(doc),
        _ => Err(BroombridgeError::Schema(v.errors)),
    }
}

fn child(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn item(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

fn key_name(k: &Value) -> String {
    match k {
        Value::String(s) => s.clone(),
        other => serde_yaml::to_string(other)
            .unwrap_or_default()
            .trim()
            .to_string(),
    }
}

#[derive(Default)]
struct Validator {
    errors: Vec<SchemaError>,
}

impl Validator {
    fn fail<T>(&mut self, path: impl Into<String>, reason: impl Into<String>) -> Option<T> {
        self.errors.push(SchemaError {
            path: path.into(),
            reason: reason.into(),
        });
        None
    }

    fn mapping<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Mapping> {
        match v {
            Value::Mapping(m) => Some(m),
            _ => self.fail(path, "expected a mapping"),
        }
    }

    fn sequence<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Vec<Value>> {
        match v {
            Value::Sequence(s) => Some(s),
            _ => self.fail(path, "expected a list"),
        }
    }

    fn required<'a>(&mut self, m: &'a Mapping, key: &str, path: &str) -> Option<&'a Value> {
        match m.get(key) {
            Some(v) => Some(v),
            None => self.fail(child(path, key), "missing required key"),
        }
    }

    fn reject_unknown(&mut self, m: &Mapping, allowed: &[&str], path: &str) {
        for k in m.keys() {
            let name = key_name(k);
            if !allowed.contains(&name.as_str()) {
                self.fail::<()>(child(path, &name), "unknown key");
            }
        }
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        match v {
            Value::String(s) => Some(s.clone()),
            _ => self.fail(path, "expected a string"),
        }
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Number(n) => match n.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => self.fail(path, "expected a finite number"),
            },
            _ => self.fail(path, "expected a number"),
        }
    }

    fn positive_int(&mut self, v: &Value, path: &str) -> Option<usize> {
        match v.as_u64() {
            Some(0) => self.fail(path, "must be at least 1"),
            Some(n) => usize::try_from(n)
                .ok()
                .or_else(|| self.fail(path, "integer too large")),
            None => self.fail(path, "expected a positive integer"),
        }
    }

    fn hartree_units(&mut self, m: &Mapping, path: &str) -> Option<()> {
        let u = self.required(m, "units", path)?;
        let units_path = child(path, "units");
        let u = self.string(u, &units_path)?;
        if u == "hartree" {
            Some(())
        } else {
            self.fail(units_path, format!("unsupported unit {u:?}; only hartree is accepted"))
        }
    }

    /// `{units: hartree, value: x}`
    fn energy(&mut self, v: &Value, path: &str) -> Option<f64> {
        let m = self.mapping(v, path)?;
        self.reject_unknown(m, &["units", "value"], path);
        let units = self.hartree_units(m, path);
        let value = self
            .required(m, "value", path)
            .and_then(|x| self.number(x, &child(path, "value")));
        units?;
        value
    }

    fn document(&mut self, root: &Value) -> Option<BroombridgeDocument> {
        let Value::Mapping(m) = root else {
            return self.fail("document", "expected a mapping at the document root");
        };

        let version = self.required(m, "format", "").and_then(|f| {
            let fm = self.mapping(f, "format")?;
            self.reject_unknown(fm, &["version"], "format");
            let v = self.required(fm, "version", "format")?;
            let s = self.string(v, "format.version")?;
            if s == FORMAT_VERSION {
                Some(s)
            } else {
                self.fail(
                    "format.version",
                    format!("unsupported version {s:?}; expected {FORMAT_VERSION:?}"),
                )
            }
        });

        let problems = self.required(m, "integral_sets", "").and_then(|sets| {
            let seq = self.sequence(sets, "integral_sets")?;
            if seq.is_empty() {
                return self.fail("integral_sets", "must contain at least one problem");
            }
            let parsed: Vec<_> = seq
                .iter()
                .enumerate()
                .map(|(i, s)| self.problem(s, &item("integral_sets", i)))
                .collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        });

        let extra: Mapping = m
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), Some("format") | Some("integral_sets")))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();

        Some(BroombridgeDocument {
            format_version: version?,
            problems: problems?,
            extra,
        })
    }

    fn problem(&mut self, v: &Value, path: &str) -> Option<ProblemDescription> {
        let m = self.mapping(v, path)?;
        let n_orbitals = self
            .required(m, "n_orbitals", path)
            .and_then(|x| self.positive_int(x, &child(path, "n_orbitals")));
        let n_electrons = self
            .required(m, "n_electrons", path)
            .and_then(|x| self.positive_int(x, &child(path, "n_electrons")));
        if let (Some(n), Some(e)) = (n_orbitals, n_electrons) {
            if e > 2 * n {
                self.fail::<()>(
                    child(path, "n_electrons"),
                    format!("{e} electrons do not fit in {} spin-orbitals", 2 * n),
                );
            }
        }

        let coulomb = self
            .required(m, "coulomb_repulsion", path)
            .and_then(|x| self.energy(x, &child(path, "coulomb_repulsion")));
        let offset = match m.get("energy_offset") {
            Some(x) => self.energy(x, &child(path, "energy_offset")),
            None => Some(0.0),
        };
        let scf = self
            .required(m, "scf_energy", path)
            .and_then(|x| self.energy(x, &child(path, "scf_energy")));
        let fci = match m.get("fci_energy") {
            Some(x) => self.fci_energy(x, &child(path, "fci_energy")).map(Some),
            None => Some(None),
        };

        let hamiltonian = self
            .required(m, "hamiltonian", path)
            .and_then(|h| self.hamiltonian(h, &child(path, "hamiltonian"), n_orbitals));

        let states = match m.get("initial_state_suggestions") {
            Some(x) => self.initial_states(x, &child(path, "initial_state_suggestions"), n_orbitals),
            None => Some(Vec::new()),
        };

        const KNOWN: [&str; 8] = [
            "n_orbitals",
            "n_electrons",
            "coulomb_repulsion",
            "energy_offset",
            "scf_energy",
            "fci_energy",
            "hamiltonian",
            "initial_state_suggestions",
        ];
        let extra: Mapping = m
            .iter()
            .filter(|(k, _)| !k.as_str().is_some_and(|s| KNOWN.contains(&s)))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();

        let (one_electron, two_electron) = hamiltonian?;
        Some(ProblemDescription {
            n_orbitals: n_orbitals?,
            n_electrons: n_electrons?,
            coulomb_repulsion: coulomb?,
            energy_offset: offset?,
            scf_energy: scf?,
            fci_energy: fci?,
            one_electron,
            two_electron,
            initial_state_suggestions: states?,
            extra,
        })
    }

    fn fci_energy(&mut self, v: &Value, path: &str) -> Option<FciEnergy> {
        let m = self.mapping(v, path)?;
        self.reject_unknown(m, &["units", "lower", "upper", "value"], path);
        let units = self.hartree_units(m, path);
        let lower = self
            .required(m, "lower", path)
            .and_then(|x| self.number(x, &child(path, "lower")));
        let upper = self
            .required(m, "upper", path)
            .and_then(|x| self.number(x, &child(path, "upper")));
        let value = match m.get("value") {
            Some(x) => self.number(x, &child(path, "value")).map(Some),
            None => Some(None),
        };
        units?;
        let (lower, upper, value) = (lower?, upper?, value?);
        if lower > upper {
            return self.fail(path, format!("lower bound {lower} exceeds upper bound {upper}"));
        }
        Some(FciEnergy {
            lower,
            upper,
            value,
        })
    }

    #[allow(clippy::type_complexity)]
    fn hamiltonian(
        &mut self,
        v: &Value,
        path: &str,
        n_orbitals: Option<usize>,
    ) -> Option<(BTreeMap<[usize; 2], f64>, BTreeMap<[usize; 4], f64>)> {
        let m = self.mapping(v, path)?;
        self.reject_unknown(
            m,
            &["one_electron_integrals", "two_electron_integrals"],
            path,
        );
        let one = self.required(m, "one_electron_integrals", path).and_then(|x| {
            self.integral_block::<2>(x, &child(path, "one_electron_integrals"), n_orbitals)
        });
        let two = self.required(m, "two_electron_integrals", path).and_then(|x| {
            self.integral_block::<4>(x, &child(path, "two_electron_integrals"), n_orbitals)
        });
        Some((one?, two?))
    }

    fn integral_block<const K: usize>(
        &mut self,
        v: &Value,
        path: &str,
        n_orbitals: Option<usize>,
    ) -> Option<BTreeMap<[usize; K], f64>> {
        let m = self.mapping(v, path)?;
        if K == 4 {
            self.reject_unknown(m, &["format", "units", "values", "index_convention"], path);
            if let Some(c) = self.required(m, "index_convention", path) {
                let cpath = child(path, "index_convention");
                if let Some(c) = self.string(c, &cpath) {
                    if c != "mulliken" {
                        self.fail::<()>(
                            cpath,
                            format!("unsupported index convention {c:?}; expected \"mulliken\""),
                        );
                    }
                }
            }
        } else {
            self.reject_unknown(m, &["format", "units", "values"], path);
        }
        if let Some(f) = m.get("format") {
            let fpath = child(path, "format");
            if let Some(f) = self.string(f, &fpath) {
                if f != "sparse" {
                    self.fail::<()>(fpath, format!("unsupported format {f:?}; expected \"sparse\""));
                }
            }
        }
        let units = self.hartree_units(m, path);
        let values_path = child(path, "values");
        let values = self.required(m, "values", path)?;
        let seq = self.sequence(values, &values_path)?;

        let mut out: BTreeMap<[usize; K], f64> = BTreeMap::new();
        let mut first_seen: HashMap<[usize; K], usize> = HashMap::new();
        let mut ok = units.is_some();
        for (i, entry) in seq.iter().enumerate() {
            let epath = item(&values_path, i);
            let Some(parsed) = self.integral_entry::<K>(entry, &epath, n_orbitals) else {
                ok = false;
                continue;
            };
            let (idx, value) = parsed;
            let key = canonicalize(idx);
            match out.get(&key) {
                Some(&prev) => {
                    if (prev - value).abs() > DUPLICATE_TOLERANCE {
                        ok = false;
                        self.fail::<()>(
                            epath,
                            format!(
                                "duplicate symmetry class with {}: value {value} disagrees with {prev}",
                                item(&values_path, first_seen[&key])
                            ),
                        );
                    }
                }
                None => {
                    out.insert(key, value);
                    first_seen.insert(key, i);
                }
            }
        }
        ok.then_some(out)
    }

    fn integral_entry<const K: usize>(
        &mut self,
        v: &Value,
        path: &str,
        n_orbitals: Option<usize>,
    ) -> Option<([usize; K], f64)> {
        let seq = self.sequence(v, path)?;
        if seq.len() != K + 1 {
            return self.fail(
                path,
                format!("expected {} orbital indices followed by a value", K),
            );
        }
        let mut idx = [0usize; K];
        let mut ok = true;
        for (j, slot) in idx.iter_mut().enumerate() {
            let ipath = item(path, j);
            match self.positive_int(&seq[j], &ipath) {
                Some(p) => {
                    if let Some(n) = n_orbitals {
                        if p > n {
                            ok = false;
                            self.fail::<()>(ipath, format!("orbital {p} exceeds n_orbitals = {n}"));
                        }
                    }
                    *slot = p - 1;
                }
                None => ok = false,
            }
        }
        let value = self.number(&seq[K], &item(path, K));
        if !ok {
            return None;
        }
        Some((idx, value?))
    }

    fn initial_states(
        &mut self,
        v: &Value,
        path: &str,
        n_orbitals: Option<usize>,
    ) -> Option<Vec<InitialStateAnsatz>> {
        let seq = self.sequence(v, path)?;
        let mut labels = HashSet::new();
        let mut out = Vec::with_capacity(seq.len());
        let mut ok = true;
        for (i, entry) in seq.iter().enumerate() {
            let epath = item(path, i);
            match self.initial_state(entry, &epath, n_orbitals) {
                Some(a) => {
                    if !labels.insert(a.label.clone()) {
                        ok = false;
                        self.fail::<()>(
                            format!("{epath}.state.label"),
                            format!("duplicate state label {:?}", a.label),
                        );
                    }
                    out.push(a);
                }
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn initial_state(
        &mut self,
        v: &Value,
        path: &str,
        n_orbitals: Option<usize>,
    ) -> Option<InitialStateAnsatz> {
        let m = self.mapping(v, path)?;
        self.reject_unknown(m, &["state"], path);
        let spath = child(path, "state");
        let s = self.required(m, "state", path)?;
        let s = self.mapping(s, &spath)?;
        self.reject_unknown(s, &["label", "energy", "method", "superposition"], &spath);
        let label = self
            .required(s, "label", &spath)
            .and_then(|x| self.string(x, &child(&spath, "label")));
        let energy = match s.get("energy") {
            Some(x) => self.energy(x, &child(&spath, "energy")).map(Some),
            None => Some(None),
        };
        let method = match s.get("method") {
            Some(x) => self.string(x, &child(&spath, "method")).map(Some),
            None => Some(None),
        };
        let terms = self.required(s, "superposition", &spath).and_then(|x| {
            let tpath = child(&spath, "superposition");
            let seq = self.sequence(x, &tpath)?;
            if seq.is_empty() {
                return self.fail(tpath, "must contain at least one term");
            }
            let parsed: Vec<_> = seq
                .iter()
                .enumerate()
                .map(|(j, t)| self.ansatz_term(t, &item(&tpath, j), n_orbitals))
                .collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        });
        Some(InitialStateAnsatz {
            label: label?,
            energy: energy?,
            method: method?,
            terms: terms?,
        })
    }

    fn ansatz_term(
        &mut self,
        v: &Value,
        path: &str,
        n_orbitals: Option<usize>,
    ) -> Option<AnsatzTerm> {
        let seq = self.sequence(v, path)?;
        if seq.len() < 2 {
            return self.fail(path, "expected a coefficient, ladder tokens and |vacuum>");
        }
        let coefficient = self.number(&seq[0], &item(path, 0));
        let last = seq.len() - 1;
        let mut ops = Vec::with_capacity(last - 1);
        let mut ok = true;
        for (j, t) in seq.iter().enumerate().skip(1) {
            let tpath = item(path, j);
            let Some(text) = self.string(t, &tpath) else {
                ok = false;
                continue;
            };
            if j == last {
                if text != VACUUM_MARKER {
                    ok = false;
                    self.fail::<()>(tpath, format!("term must end with {VACUUM_MARKER:?}"));
                }
                continue;
            }
            if text == VACUUM_MARKER {
                ok = false;
                self.fail::<()>(tpath, "vacuum marker must be the last token");
                continue;
            }
            match parse_token(&text) {
                Ok(tok) => {
                    if let Some(n) = n_orbitals {
                        if tok.orbital >= n {
                            ok = false;
                            self.fail::<()>(
                                tpath,
                                format!("orbital {} exceeds n_orbitals = {n}", tok.orbital + 1),
                            );
                            continue;
                        }
                    }
                    ops.push(tok);
                }
                Err(reason) => {
                    ok = false;
                    self.fail::<()>(tpath, reason);
                }
            }
        }
        if !ok {
            return None;
        }
        Some(AnsatzTerm {
            coefficient: coefficient?,
            ops,
        })
    }
}

fn canonicalize<const K: usize>(idx: [usize; K]) -> [usize; K] {
    let mut out = idx;
    match K {
        2 => {
            let c = canonical_one_electron_key([idx[0], idx[1]]);
            out[..2].copy_from_slice(&c);
        }
        4 => {
            let c = canonical_two_electron_key([idx[0], idx[1], idx[2], idx[3]]);
            out[..4].copy_from_slice(&c);
        }
        _ => unreachable!("integral arity is 2 or 4"),
    }
    out
}
