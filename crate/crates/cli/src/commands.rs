use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use qchem_core::analysis::{
    apply_exclusion_rules, fit_inverse_square, fit_report_csv, sweep_csv, ExclusionConfig, SweepPoint,
};
use qchem_core::broombridge::{
    generate_synthetic_problem, parse_document, serialize_document, BroombridgeDocument, ProblemDescription,
};
use qchem_core::dynamics::TrotterOrder;
use qchem_core::exactdiag::{lowest_eigenpairs, sector_basis, ExactDiagError};
use qchem_core::hamiltonian::{
    build_fermion_hamiltonian, jordan_wigner_with_limit, PauliHamiltonian, MAX_PAULI_QUBITS,
};
use qchem_core::resources::{
    estimate_csv_row, estimate_total, parse_cost_records, CostModelRegistry, CostRequest, ESTIMATE_CSV_HEADER,
};
use qchem_core::rpe::{repetition_seed, RpeConfig, RpeMode, RpeSession};

use crate::manifest::{emit, RunManifest};
use crate::{Command, ModeArg, OrderArg, RpeArgs};

pub enum Failure {
    User(anyhow::Error),
    Internal(anyhow::Error),
}

type Outcome = Result<(), Failure>;

trait UserErr<T> {
    fn user(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> UserErr<T> for Result<T, E> {
    fn user(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::User(e.into()))
    }
}

fn user(msg: String) -> Failure {
    Failure::User(anyhow!(msg))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { file } => validate(&file),
        Command::Info { file, cutoff, out } => info(&file, cutoff, out.out.as_deref()),
        Command::Fci {
            file,
            states,
            problem,
            seed,
            out,
        } => fci(&file, states, problem, seed, out.out.as_deref()),
        Command::Rpe { file, rpe: args, t, reps, out } => rpe(&file, &args, t, reps, out.out.as_deref()),
        Command::TrotterSweep {
            file,
            rpe,
            r_list,
            reps,
            ground_hint,
            gap,
            trotter_cap,
            out,
        } => trotter_sweep(&file, &rpe, &r_list, reps, ground_hint, gap, trotter_cap, out),
        Command::Resources {
            file,
            row,
            cost_table,
            model,
            lambda,
            delta,
            factor,
            cutoff,
            problem,
            out,
        } => resources(
            file.as_deref(),
            &row,
            cost_table.as_deref(),
            &model,
            lambda,
            delta,
            factor,
            cutoff,
            problem,
            out.out.as_deref(),
        ),
        Command::Synth {
            seed,
            orbitals,
            electrons,
            density,
            out,
        } => synth(seed, orbitals, electrons, density, out.out.as_deref()),
    }
}

fn read_input(file: &Path) -> Result<(Vec<u8>, BroombridgeDocument), Failure> {
    let bytes = std::fs::read(file)
        .with_context(|| format!("reading {}", file.display()))
        .user()?;
    let text = String::from_utf8(bytes.clone())
        .with_context(|| format!("{} is not UTF-8", file.display()))
        .user()?;
    let doc = parse_document(&text)
        .with_context(|| format!("{} failed validation", file.display()))
        .user()?;
    Ok((bytes, doc))
}

fn select(doc: &BroombridgeDocument, index: usize) -> Result<&ProblemDescription, Failure> {
    doc.problems.get(index).ok_or_else(|| {
        user(format!(
            "problem index {index} out of range; the file has {}",
            doc.problems.len()
        ))
    })
}

fn pauli(problem: &ProblemDescription) -> Result<PauliHamiltonian, Failure> {
    let f = build_fermion_hamiltonian(problem).user()?;
    jordan_wigner_with_limit(&f, MAX_PAULI_QUBITS).user()
}

fn validate(file: &Path) -> Outcome {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading {}", file.display()))
        .user()?;
    match parse_document(&text) {
        Ok(doc) => {
            println!("{}: valid, {} problem(s)", file.display(), doc.problems.len());
            Ok(())
        }
        Err(e) => {
            if e.schema_errors().is_empty() {
                eprintln!("{}: {e}", file.display());
            } else {
                for err in e.schema_errors() {
                    eprintln!("{}: {err}", file.display());
                }
            }
            Err(user(format!("{} is not a valid Broombridge document", file.display())))
        }
    }
}

fn info(file: &Path, cutoff: Option<f64>, out: Option<&Path>) -> Outcome {
    let (bytes, doc) = read_input(file)?;
    let mut csv = String::from("problem,orbitals,electrons,one_electron_integrals,two_electron_integrals,pauli_terms,l1_norm,qubits\n");
    for (i, p) in doc.problems.iter().enumerate() {
        let mut h = pauli(p)?;
        if let Some(c) = cutoff {
            h = h.truncate_terms(c);
        }
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{},{},{}",
            p.n_orbitals,
            p.n_electrons,
            p.one_electron_len(),
            p.two_electron_len(),
            h.len(),
            h.l1_norm(),
            h.n_qubits
        );
    }
    let mut m = RunManifest::new(Some((file, &bytes)), None);
    if let Some(c) = cutoff {
        m = m.detail("cutoff", c);
    }
    emit(out, &csv, &m).user()
}

fn fci(file: &Path, states: usize, problem: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let (bytes, doc) = read_input(file)?;
    let p = select(&doc, problem)?;
    let h = build_fermion_hamiltonian(p).user()?;
    let basis = sector_basis(p.n_spin_orbitals(), p.n_electrons).user()?;
    let spectrum = match lowest_eigenpairs(&h, &basis, states, seed) {
        Ok(s) => s,
        Err(e @ ExactDiagError::Convergence { .. }) => return Err(Failure::Internal(e.into())),
        Err(e) => return Err(Failure::User(e.into())),
    };
    let mut csv = String::from("index,energy\n");
    for (k, e) in spectrum.eigenvalues.iter().enumerate() {
        let _ = writeln!(csv, "{k},{e:.12}");
    }
    let m = RunManifest::new(Some((file, &bytes)), Some(seed))
        .detail("problem", problem as u64)
        .detail("states", states as u64)
        .detail("sector_dimension", basis.dim() as u64);
    emit(out, &csv, &m).user()
}

fn rpe_config(args: &RpeArgs, t: f64) -> RpeConfig {
    let mut c = RpeConfig::new(args.bits, t);
    c.shots_per_round = args.shots;
    c.seed = args.seed;
    c.mode = match args.mode {
        ModeArg::Circuit => RpeMode::Circuit,
        ModeArg::Projective => RpeMode::Projective,
    };
    c.order = match args.order {
        OrderArg::First => TrotterOrder::First,
        OrderArg::Second => TrotterOrder::Second,
    };
    c
}

fn state_label(p: &ProblemDescription, args: &RpeArgs) -> Result<String, Failure> {
    match &args.state {
        Some(l) => Ok(l.clone()),
        None => p
            .initial_state_suggestions
            .first()
            .map(|s| s.label.clone())
            .ok_or_else(|| user("the problem has no initial state suggestions; pass --state".into())),
    }
}

fn rpe(file: &Path, args: &RpeArgs, t: f64, reps: usize, out: Option<&Path>) -> Outcome {
    let (bytes, doc) = read_input(file)?;
    let p = select(&doc, args.problem)?;
    let label = state_label(p, args)?;
    let config = rpe_config(args, t);
    let session = RpeSession::from_problem(p, &label, config).user()?;
    let summary = session.repeat(reps).user()?;
    for c in &summary.clusters {
        eprintln!(
            "cluster {}: {} estimate(s), mean {:.6} Ha{}",
            c.cluster_id,
            c.count,
            c.mean,
            c.std.map(|s| format!(", std {s:.2e}")).unwrap_or_default()
        );
    }
    let m = RunManifest::new(Some((file, &bytes)), Some(args.seed))
        .detail("state", label)
        .detail("t", t)
        .detail("bits", args.bits as u64)
        .detail("shots_per_round", args.shots as u64)
        .detail("repetitions", reps as u64)
        .detail("mode", format!("{:?}", args.mode).to_lowercase())
        .detail("error_target", config.error_target());
    emit(out, &summary.to_csv(t), &m).user()
}

#[allow(clippy::too_many_arguments)]
fn trotter_sweep(
    file: &Path,
    args: &RpeArgs,
    r_list: &[u32],
    reps: usize,
    ground_hint: Option<f64>,
    gap: Option<f64>,
    trotter_cap: Option<f64>,
    out: Option<PathBuf>,
) -> Outcome {
    let (bytes, doc) = read_input(file)?;
    let p = select(&doc, args.problem)?;
    let label = state_label(p, args)?;
    if r_list.contains(&0) {
        return Err(user("Trotter numbers must be positive".into()));
    }
    let mut points = Vec::new();
    let mut widest = 0.0f64;
    for &r in r_list {
        let t = 1.0 / r as f64;
        let mut config = rpe_config(args, t);
        config.seed = repetition_seed(args.seed, r as u64);
        widest = widest.max(config.error_target());
        let session = RpeSession::from_problem(p, &label, config).user()?;
        for e in session.repeat(reps).user()?.estimates {
            points.push(SweepPoint::new(r, e.energy, e.std_error));
        }
    }
    let exclusion = ExclusionConfig {
        gap_threshold: Some(gap.unwrap_or(10.0 * widest)),
        trotter_error_cap: trotter_cap,
    };
    let points = apply_exclusion_rules(&points, ground_hint, &exclusion);
    let sweep = sweep_csv(&points);
    let fit = fit_inverse_square(&points).context("extrapolation failed").user()?;
    let report = fit_report_csv(&fit);

    let manifest = |kind: &str| {
        RunManifest::new(Some((file, &bytes)), Some(args.seed))
            .detail("output", kind)
            .detail("state", label.clone())
            .detail("bits", args.bits as u64)
            .detail("r_list", r_list.iter().map(|r| *r as u64).collect::<Vec<_>>())
            .detail("repetitions", reps as u64)
    };
    match out {
        Some(prefix) => {
            let with = |ext: &str| {
                let mut s = prefix.as_os_str().to_owned();
                s.push(ext);
                PathBuf::from(s)
            };
            emit(Some(&with(".sweep.csv")), &sweep, &manifest("sweep")).user()?;
            emit(Some(&with(".fit.csv")), &report, &manifest("fit")).user()
        }
        None => {
            print!("{sweep}\n{report}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn resources(
    file: Option<&Path>,
    rows: &[String],
    cost_table: Option<&Path>,
    model: &str,
    lambda: Option<f64>,
    delta: f64,
    factor: u8,
    cutoff: f64,
    problem: usize,
    out: Option<&Path>,
) -> Outcome {
    let mut registry = CostModelRegistry::bundled();
    if let Some(path) = cost_table {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .user()?;
        registry.add_records(
            parse_cost_records(&text)
                .with_context(|| format!("in {}", path.display()))
                .user()?,
        );
    }
    let mut csv = format!("{ESTIMATE_CSV_HEADER}\n");
    let mut input = None;

    if let Some(file) = file {
        let (bytes, doc) = read_input(file)?;
        let h = pauli(select(&doc, problem)?)?.truncate_terms(cutoff);
        let step = registry
            .load_step_cost(&CostRequest::Model {
                name: model,
                hamiltonian: &h,
            })
            .user()?;
        let lam = lambda.unwrap_or_else(|| h.l1_norm());
        let e = estimate_total(&step, lam, delta, factor).user()?;
        let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(csv, "{}", estimate_csv_row(&format!("{name}:{model}"), &step, &e));
        input = Some((file.to_path_buf(), bytes));
    }

    let names: Vec<String> = if rows.iter().any(|r| r == "all") {
        registry.records().iter().map(|r| r.name.clone()).collect()
    } else {
        rows.to_vec()
    };
    for name in &names {
        let step = registry.load_step_cost(&CostRequest::Table(name)).user()?;
        let lam = match (lambda, registry.record(name).and_then(|r| r.l1_norm)) {
            (Some(l), _) | (None, Some(l)) => l,
            (None, None) => return Err(user(format!("row `{name}` has no l1_norm; pass --lambda"))),
        };
        let e = estimate_total(&step, lam, delta, factor).user()?;
        let _ = writeln!(csv, "{}", estimate_csv_row(name, &step, &e));
    }
    if file.is_none() && names.is_empty() {
        return Err(user("give a Broombridge file or at least one --row".into()));
    }
    let m = RunManifest::new(input.as_ref().map(|(p, b)| (p.as_path(), b.as_slice())), None)
        .detail("delta", delta)
        .detail("convention_factor", factor as u64);
    emit(out, &csv, &m).user()
}

fn synth(seed: u64, orbitals: usize, electrons: usize, density: f64, out: Option<&Path>) -> Outcome {
    let doc = generate_synthetic_problem(seed, orbitals, electrons, density).user()?;
    let text = serialize_document(&doc).map_err(|e| Failure::Internal(e.into()))?;
    let m = RunManifest::new(None, Some(seed))
        .detail("orbitals", orbitals as u64)
        .detail("electrons", electrons as u64)
        .detail("density", density);
    emit(out, &text, &m).user()
}
