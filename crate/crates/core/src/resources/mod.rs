//! T-gate resource estimates for phase estimation on the qubitization walk.
//!
//! Per-step costs come from data (a bundled table of C20 active spaces, or
//! user records) or from a registered heuristic model; the rest is
//! arithmetic.

use std::fmt::Write as _;

use thiserror::Error;

use crate::hamiltonian::PauliHamiltonian;

const BUNDLED_COSTS: &str = include_str!("../../data/step_costs.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResourceError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("unknown cost model `{0}`")]
    UnknownModel(String),
    #[error("cost record line {line}: {reason}")]
    Record { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCost {
    pub qubits: u64,
    pub t_gates: u64,
    pub rz_rotations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostRecord {
    pub name: String,
    pub cost: StepCost,
    /// One-norm the record was measured with, when known.
    pub l1_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceEstimate {
    pub lambda: f64,
    pub delta: f64,
    pub queries: u64,
    pub synthesis_t: u64,
    pub total_t: u64,
    pub qubits: u64,
    pub convention_factor: u8,
}

fn check_factor(factor: u8) -> Result<(), ResourceError> {
    match factor {
        1 | 2 => Ok(()),
        f => Err(ResourceError::Argument(format!("convention factor must be 1 or 2, got {f}"))),
    }
}

/// Ceiling that ignores relative rounding noise below `1e-9`.
fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Walk-operator applications `ceil(lambda / (factor * delta))`.
pub fn queries_for_precision(lambda: f64, delta: f64, convention_factor: u8) -> Result<u64, ResourceError> {
    check_factor(convention_factor)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ResourceError::Argument(format!("delta must be positive, got {delta}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ResourceError::Argument(format!("lambda must be non-negative, got {lambda}")));
    }
    let q = snapped_ceil(lambda / (convention_factor as f64 * delta));
    if q > u64::MAX as f64 {
        return Err(ResourceError::Argument("query count overflows".into()));
    }
    Ok(q as u64)
}

/// Expected T count `ceil(3 n log2(n / eps))` to synthesize `n_rz`
/// rotations within total error `eps`.
pub fn synthesis_t_count(n_rz: u64, epsilon_total: f64) -> Result<u64, ResourceError> {
    if !(epsilon_total > 0.0 && epsilon_total.is_finite()) {
        return Err(ResourceError::Argument(format!(
            "epsilon must be positive, got {epsilon_total}"
        )));
    }
    if n_rz == 0 {
        return Ok(0);
    }
    let n = n_rz as f64;
    let bits = (n / epsilon_total).log2().max(0.0);
    Ok(snapped_ceil(3.0 * n * bits) as u64)
}

/// Total T count for one ground-energy estimate to precision `delta`.
///
/// All `queries * rz_rotations` rotations share a synthesis budget equal
/// to `delta`.
pub fn estimate_total(step: &StepCost, lambda: f64, delta: f64, convention_factor: u8) -> Result<ResourceEstimate, ResourceError> {
    let queries = queries_for_precision(lambda, delta, convention_factor)?;
    let n_rz = queries
        .checked_mul(step.rz_rotations)
        .ok_or_else(|| ResourceError::Argument("rotation count overflows".into()))?;
    let synthesis_t = synthesis_t_count(n_rz, delta)?;
    let total_t = queries
        .checked_mul(step.t_gates)
        .and_then(|t| t.checked_add(synthesis_t))
        .ok_or_else(|| ResourceError::Argument("T count overflows".into()))?;
    Ok(ResourceEstimate {
        lambda,
        delta,
        queries,
        synthesis_t,
        total_t,
        qubits: step.qubits,
        convention_factor,
    })
}

/// Parses `name,qubits,t_gates,rz_rotations[,l1_norm]` rows. A header row
/// starting with `name` and blank or `#` lines are skipped.
pub fn parse_cost_records(text: &str) -> Result<Vec<CostRecord>, ResourceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("name")) {
            continue;
        }
        let bad = |reason: String| ResourceError::Record { line: i + 1, reason };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(bad(format!("expected 4 or 5 fields, found {}", fields.len())));
        }
        if fields[0].is_empty() {
            return Err(bad("empty name".into()));
        }
        let count = |k: usize, what: &str| {
            fields[k]
                .parse::<u64>()
                .map_err(|_| bad(format!("{what} `{}` is not a non-negative integer", fields[k])))
        };
        let cost = StepCost {
            qubits: count(1, "qubits")?,
            t_gates: count(2, "t_gates")?,
            rz_rotations: count(3, "rz_rotations")?,
        };
        let l1_norm = match fields.get(4) {
            None | Some(&"") => None,
            Some(s) => match s.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => Some(v),
                _ => return Err(bad(format!("l1_norm `{s}` is not a non-negative number"))),
            },
        };
        if out.iter().any(|r: &CostRecord| r.name == fields[0]) {
            return Err(bad(format!("duplicate name `{}`", fields[0])));
        }
        out.push(CostRecord {
            name: fields[0].to_string(),
            cost,
            l1_norm,
        });
    }
    Ok(out)
}

/// Per-step costs computed from a Hamiltonian.
pub trait StepCostModel: Send + Sync {
    fn name(&self) -> &str;
    fn step_cost(&self, h: &PauliHamiltonian) -> StepCost;
}

/// Rough walk-step cost for `L` Pauli terms on `n` qubits: unary-iteration
/// select over the terms (`4(L-1)` T gates), a rotation-tree state
/// preparation (`L - 1` rotations), and `n + 2 ceil(log2 L) + 1` qubits.
pub struct LinearSelectModel;

impl StepCostModel for LinearSelectModel {
    fn name(&self) -> &str {
        "linear-select"
    }

    fn step_cost(&self, h: &PauliHamiltonian) -> StepCost {
        let l = h.len() as u64;
        if l == 0 {
            return StepCost::default();
        }
        let index_bits = 64 - (l - 1).leading_zeros() as u64;
        StepCost {
            qubits: h.n_qubits as u64 + 2 * index_bits + 1,
            t_gates: 4 * (l - 1),
            rz_rotations: l - 1,
        }
    }
}

/// Source of a per-step cost.
pub enum CostRequest<'a> {
    Table(&'a str),
    Model { name: &'a str, hamiltonian: &'a PauliHamiltonian },
}

/// Table records and heuristic models available by name.
pub struct CostModelRegistry {
    records: Vec<CostRecord>,
    models: Vec<Box<dyn StepCostModel>>,
}

impl CostModelRegistry {
    pub fn empty() -> Self {
        Self {
            records: Vec::new(),
            models: Vec::new(),
        }
    }

    /// The bundled C20 table rows and the `linear-select` model.
    pub fn bundled() -> Self {
        let mut r = Self::empty();
        r.records = parse_cost_records(BUNDLED_COSTS).expect("bundled cost table parses");
        r.register(Box::new(LinearSelectModel));
        r
    }

    /// Adds records, replacing any with the same name.
    pub fn add_records(&mut self, records: Vec<CostRecord>) {
        for rec in records {
            self.records.retain(|r| r.name != rec.name);
            self.records.push(rec);
        }
    }

    pub fn register(&mut self, model: Box<dyn StepCostModel>) {
        self.models.retain(|m| m.name() != model.name());
        self.models.push(model);
    }

    pub fn records(&self) -> &[CostRecord] {
        &self.records
    }

    pub fn record(&self, name: &str) -> Option<&CostRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn load_step_cost(&self, request: &CostRequest) -> Result<StepCost, ResourceError> {
        match request {
            CostRequest::Table(name) => self
                .record(name)
                .map(|r| r.cost)
                .ok_or_else(|| ResourceError::UnknownModel(name.to_string())),
            CostRequest::Model { name, hamiltonian } => self
                .models
                .iter()
                .find(|m| m.name() == *name)
                .map(|m| m.step_cost(hamiltonian))
                .ok_or_else(|| ResourceError::UnknownModel(name.to_string())),
        }
    }
}

/// [`CostModelRegistry::load_step_cost`] on the bundled registry.
pub fn load_step_cost(request: &CostRequest) -> Result<StepCost, ResourceError> {
    CostModelRegistry::bundled().load_step_cost(request)
}

pub const ESTIMATE_CSV_HEADER: &str = "name,qubits,t_gates,rz_rotations,l1_norm,delta,convention_factor,queries,synthesis_t,total_t";

/// One CSV row, columns as in [`ESTIMATE_CSV_HEADER`].
pub fn estimate_csv_row(name: &str, step: &StepCost, e: &ResourceEstimate) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{},{},{},{},{},{},{},{},{},{}",
        name,
        step.qubits,
        step.t_gates,
        step.rz_rotations,
        e.lambda,
        e.delta,
        e.convention_factor,
        e.queries,
        e.synthesis_t,
        e.total_t
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_examples() {
        assert_eq!(queries_for_precision(962.0, 0.001, 2), Ok(481_000));
        assert_eq!(queries_for_precision(962.0, 0.001, 1), Ok(962_000));
        assert_eq!(queries_for_precision(0.5, 0.5, 1), Ok(1));
        assert_eq!(queries_for_precision(0.51, 0.5, 1), Ok(2));
        assert!(queries_for_precision(1.0, 0.0, 1).is_err());
        assert!(queries_for_precision(1.0, 0.1, 3).is_err());
    }

    #[test]
    fn synthesis_examples() {
        assert_eq!(synthesis_t_count(0, 1e-3), Ok(0));
        assert_eq!(synthesis_t_count(1, 1e-3), Ok(30));
        // 54 * log2(18000) = 763.33
        assert_eq!(synthesis_t_count(18, 1e-3), Ok(764));
        assert!(synthesis_t_count(3, -1.0).is_err());
    }

    #[test]
    fn ring_total() {
        let reg = CostModelRegistry::bundled();
        let rec = reg.record("ring-50-optimized").unwrap();
        let e = estimate_total(&rec.cost, rec.l1_norm.unwrap(), 1e-3, 1).unwrap();
        assert_eq!(e.queries, 962_000);
        assert!((e.total_t as f64 / 1.8e13 - 1.0).abs() < 0.03);
        let half = estimate_total(&rec.cost, 962.0, 2e-3, 1).unwrap();
        assert_eq!(2 * half.queries, e.queries);
    }

    #[test]
    fn table_lookup_and_models() {
        let reg = CostModelRegistry::bundled();
        assert_eq!(
            reg.load_step_cost(&CostRequest::Table("bowl-50-optimized")),
            Ok(StepCost {
                qubits: 316,
                t_gates: 52_357_100,
                rz_rotations: 18
            })
        );
        assert_eq!(reg.record("ring-50-generic").unwrap().cost.rz_rotations, 17_931_406);
        let empty = PauliHamiltonian::new(4, 0.0);
        assert_eq!(
            reg.load_step_cost(&CostRequest::Model {
                name: "linear-select",
                hamiltonian: &empty
            }),
            Ok(StepCost::default())
        );
        assert_eq!(
            reg.load_step_cost(&CostRequest::Table("nope")),
            Err(ResourceError::UnknownModel("nope".into()))
        );
    }

    #[test]
    fn record_errors() {
        assert!(matches!(parse_cost_records("a,1,2"), Err(ResourceError::Record { line: 1, .. })));
        assert!(matches!(
            parse_cost_records("name,q\na,1,2,3\na,1,2,3"),
            Err(ResourceError::Record { line: 3, .. })
        ));
        assert!(parse_cost_records("a,1,-2,3").is_err());
        assert_eq!(parse_cost_records("# c\n\nx,1,2,3\n").unwrap()[0].l1_norm, None);
    }
}
