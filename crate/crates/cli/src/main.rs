//! `qchem`: validate electronic-structure files, diagonalize, run phase
//! estimation and Trotter sweeps, and estimate qubitization resources.
//!
//! Exit status is 0 on success, 1 for bad input or arguments and 2 for
//! internal failures.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qchem", version, about = "Quantum chemistry simulation workflows")]
struct Cli {
    /// Worker threads for repetition-level parallelism (default: all cores).
    #[arg(long, global = true, env = "QCHEM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a Broombridge file and list every schema error.
    Validate { file: PathBuf },
    /// Orbital, electron and term counts, one-norm and qubit count.
    Info {
        file: PathBuf,
        /// Drop Pauli terms with |coefficient| below this.
        #[arg(long)]
        cutoff: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Lowest eigenvalues in the problem's particle-number sector.
    Fci {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        problem: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Robust phase estimation from a trial state.
    Rpe {
        file: PathBuf,
        #[command(flatten)]
        rpe: RpeArgs,
        /// Trotter step size in inverse hartree.
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Phase estimation over Trotter numbers r (step 1/r) and the
    /// `E0 + m / r^2` extrapolation.
    TrotterSweep {
        file: PathBuf,
        #[command(flatten)]
        rpe: RpeArgs,
        /// Comma-separated Trotter numbers.
        #[arg(long, value_delimiter = ',', required = true)]
        r_list: Vec<u32>,
        /// Estimates per Trotter number.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Reference for excited-state exclusion; default is the lowest
        /// estimate at each Trotter number.
        #[arg(long)]
        ground_hint: Option<f64>,
        /// Excited-state gap; default is ten error bounds of the coarsest step.
        #[arg(long)]
        gap: Option<f64>,
        /// Exclude points whose fitted Trotter bias exceeds this.
        #[arg(long)]
        trotter_cap: Option<f64>,
        /// Writes PREFIX.sweep.csv and PREFIX.fit.csv instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Qubitization T-count estimate.
    Resources {
        /// Broombridge file whose one-norm and heuristic step cost are used.
        file: Option<PathBuf>,
        /// Named cost-table row(s); `all` selects every row.
        #[arg(long)]
        row: Vec<String>,
        /// Extra cost records, `name,qubits,t_gates,rz_rotations[,l1_norm]`.
        #[arg(long)]
        cost_table: Option<PathBuf>,
        /// Heuristic step-cost model applied to FILE.
        #[arg(long, default_value = "linear-select")]
        model: String,
        /// One-norm override in hartree.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        factor: u8,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        #[arg(long, default_value_t = 0)]
        problem: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Random Broombridge problem with a Hartree-Fock trial state.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        orbitals: usize,
        #[arg(long)]
        electrons: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file; a `.manifest.yaml` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Circuit,
    Projective,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    First,
    Second,
}

#[derive(Args, Debug, Clone)]
struct RpeArgs {
    #[arg(long, default_value_t = 10)]
    bits: u32,
    /// Trial state label; default is the first suggestion in the file.
    #[arg(long)]
    state: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Circuit)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = OrderArg::First)]
    order: OrderArg,
    #[arg(long, default_value_t = qchem_core::rpe::DEFAULT_SHOTS_PER_ROUND)]
    shots: u32,
    #[arg(long, default_value_t = 0)]
    problem: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = std::panic::catch_unwind(|| commands::run(cli.command));
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(commands::Failure::User(e))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Ok(Err(commands::Failure::Internal(e))) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
