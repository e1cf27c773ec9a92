//! Robust phase estimation of the Trotterized evolution `U = exp(-i H t)`.
//!
//! Round `k` of `b` applies `U^(2^(k-1))` controlled on one ancilla and
//! measures the ancilla in the X and Y bases. Each round resolves one more
//! bit of the eigenphase, giving an energy error of about `t / 2^(b-1)`.
//! The eigenphase of an eigenstate with energy `E` is `-E t`.
//!
//! Two execution modes share the same interface: `Circuit` simulates every
//! shot on a persistent system register, `Projective` samples an eigenstate
//! with Born weights and perturbs its Trotter eigenphase by the nominal
//! estimation error.

mod circuit;
mod projective;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::broombridge::ProblemDescription;
use crate::dynamics::{CompiledStep, DynamicsError, TrotterOrder, TrotterPlan};
use crate::exactdiag::{sector_basis, ExactDiagError};
use crate::hamiltonian::{build_fermion_hamiltonian, jordan_wigner, HamiltonianError, PauliHamiltonian};
use crate::simulator::{prepare_ansatz, SimulatorError, StateVector, MAX_STATE_QUBITS};

pub use projective::ProjectiveModel;

/// Ancilla shots per measurement basis per round.
pub const DEFAULT_SHOTS_PER_ROUND: u32 = 100;

/// Estimates closer than this many error targets share a cluster.
pub const CLUSTER_WIDTH_FACTOR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RpeError {
    #[error("trial state has no overlap with any eigenstate")]
    ZeroOverlap,
    #[error("{requested} qubits requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("no energy in the window is consistent with the phase")]
    NoSolution,
    #[error("several energies in the window are consistent with the phase")]
    MultipleSolutions,
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    ExactDiag(#[from] ExactDiagError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RpeMode {
    Circuit,
    Projective,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RpeConfig {
    pub bits: u32,
    pub step_size: f64,
    pub shots_per_round: u32,
    pub mode: RpeMode,
    pub order: TrotterOrder,
    pub seed: u64,
}

impl RpeConfig {
    pub fn new(bits: u32, step_size: f64) -> Self {
        Self {
            bits,
            step_size,
            shots_per_round: DEFAULT_SHOTS_PER_ROUND,
            mode: RpeMode::Circuit,
            order: TrotterOrder::First,
            seed: 0,
        }
    }

    /// Nominal energy error `t / 2^(b-1)`.
    pub fn error_target(&self) -> f64 {
        self.step_size / 2f64.powi(self.bits as i32 - 1)
    }

    pub fn validate(&self) -> Result<(), RpeError> {
        if self.bits == 0 || self.bits > 40 {
            return Err(RpeError::Argument(format!("bits must lie in 1..=40, got {}", self.bits)));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(RpeError::Argument(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.shots_per_round == 0 {
            return Err(RpeError::Argument("shots_per_round must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEstimate {
    /// Estimated eigenphase of the step without its identity part, in (-pi, pi].
    pub phase: f64,
    pub energy: f64,
    pub std_error: f64,
    pub bits_used: u32,
    pub repetitions: usize,
    pub seed: u64,
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// The unique `E` in the closed window `[lower, upper]` with
/// `-E t = phase (mod 2 pi)`.
pub fn dealias_energy(phase: f64, t: f64, window: [f64; 2]) -> Result<f64, RpeError> {
    let [lower, upper] = window;
    if !(t > 0.0) || !(lower <= upper) {
        return Err(RpeError::Argument("need t > 0 and lower <= upper".into()));
    }
    let period = 2.0 * PI / t;
    let base = -phase / t;
    let m_lo = ((lower - base) / period).ceil();
    let m_hi = ((upper - base) / period).floor();
    match (m_hi - m_lo) as i64 {
        n if n < 0 => Err(RpeError::NoSolution),
        0 => Ok(base + m_lo * period),
        _ => Err(RpeError::MultipleSolutions),
    }
}

/// The `E` with `-E t = phase (mod 2 pi)` in `[center - pi/t, center + pi/t)`.
pub fn principal_energy(phase: f64, t: f64, center: f64) -> f64 {
    let period = 2.0 * PI / t;
    let base = -phase / t;
    let lower = center - 0.5 * period;
    base + ((lower - base) / period).ceil() * period
}

/// Independent seed for repetition `index`.
pub fn repetition_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything reused across repetitions of one estimation problem.
pub struct RpeSession {
    config: RpeConfig,
    n_qubits: usize,
    identity_offset: f64,
    window_center: f64,
    step: CompiledStep,
    hamiltonian: PauliHamiltonian,
    initial: Vec<Complex64>,
    projective: std::sync::OnceLock<Result<ProjectiveModel, RpeError>>,
}

impl RpeSession {
    /// Session for the trial state `label` of `problem`.
    ///
    /// The de-aliasing window is centred on the FCI value (or the midpoint
    /// of its bounds) when present and on the SCF energy otherwise.
    pub fn from_problem(problem: &ProblemDescription, label: &str, config: RpeConfig) -> Result<Self, RpeError> {
        config.validate()?;
        let n = problem.n_spin_orbitals();
        if config.mode == RpeMode::Circuit && n + 1 > MAX_STATE_QUBITS {
            return Err(RpeError::Capacity {
                requested: n + 1,
                limit: MAX_STATE_QUBITS,
            });
        }
        let prepared = match prepare_ansatz(problem, label) {
            Err(SimulatorError::ZeroNorm) => return Err(RpeError::ZeroOverlap),
            other => other?,
        };
        let h = jordan_wigner(&build_fermion_hamiltonian(problem)?)?;
        let center = problem
            .fci_energy
            .map(|f| f.center())
            .unwrap_or(problem.scf_energy);
        Self::new(&h, &prepared.state, center, config)
    }

    /// Session for an arbitrary qubit Hamiltonian and trial state.
    pub fn new(
        h: &PauliHamiltonian,
        initial: &StateVector,
        window_center: f64,
        config: RpeConfig,
    ) -> Result<Self, RpeError> {
        config.validate()?;
        let n = h.n_qubits;
        if initial.n_qubits() != n {
            return Err(RpeError::Argument(format!(
                "trial state has {} qubits, Hamiltonian has {n}",
                initial.n_qubits()
            )));
        }
        if config.mode == RpeMode::Circuit && n + 1 > MAX_STATE_QUBITS {
            return Err(RpeError::Capacity {
                requested: n + 1,
                limit: MAX_STATE_QUBITS,
            });
        }
        if initial.norm_sqr() < 1e-24 {
            return Err(RpeError::ZeroOverlap);
        }
        let plan = TrotterPlan::new(&h.without_identity(), config.step_size, config.order)?;

        // run inside one particle-number sector when the trial state has a
        // definite particle number and the step preserves it
        let occupied: Vec<u32> = initial
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(b, _)| (b as u64).count_ones())
            .collect();
        let definite = occupied.windows(2).all(|w| w[0] == w[1]);
        let step = match definite.then(|| sector_basis(n, occupied[0] as usize)) {
            Some(Ok(sector)) => match CompiledStep::new(&plan, Some(&sector)) {
                Ok(s) => s,
                Err(DynamicsError::Argument(_)) => CompiledStep::new(&plan, None)?,
                Err(e) => return Err(e.into()),
            },
            _ => CompiledStep::new(&plan, None)?,
        };
        let mut initial_v = step.restrict(initial)?;
        let norm = initial_v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        initial_v.iter_mut().for_each(|a| *a /= norm);

        Ok(Self {
            config,
            n_qubits: n,
            identity_offset: h.identity_coefficient,
            window_center,
            step,
            hamiltonian: h.clone(),
            initial: initial_v,
            projective: std::sync::OnceLock::new(),
        })
    }

    pub fn config(&self) -> &RpeConfig {
        &self.config
    }

    pub fn window_center(&self) -> f64 {
        self.window_center
    }

    /// Dimension of the register the system is simulated in.
    pub fn subspace_dim(&self) -> usize {
        self.step.dim()
    }

    fn finish(&self, phase: f64, seed: u64) -> PhaseEstimate {
        let phase = wrap_phase(phase);
        let t = self.config.step_size;
        let energy = self.identity_offset
            + principal_energy(phase, t, self.window_center - self.identity_offset);
        PhaseEstimate {
            phase,
            energy,
            std_error: self.config.error_target(),
            bits_used: self.config.bits,
            repetitions: 1,
            seed,
        }
    }

    /// One estimate using `seed` for all randomness.
    pub fn estimate(&self, seed: u64) -> Result<PhaseEstimate, RpeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = match self.config.mode {
            RpeMode::Circuit => circuit::run(&self.step, &self.initial, &self.config, &mut rng)?,
            RpeMode::Projective => {
                let model = self
                    .projective
                    .get_or_init(|| ProjectiveModel::build(&self.hamiltonian.without_identity(), &self.step, &self.initial))
                    .as_ref()
                    .map_err(Clone::clone)?;
                model.sample_phase(&self.config, &mut rng)
            }
        };
        Ok(self.finish(phase, seed))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
}

pub fn estimate_phase(problem: &ProblemDescription, ansatz_label: &str, config: &RpeConfig) -> Result<PhaseEstimate, RpeError> {
    RpeSession::from_problem(problem, ansatz_label, *config)?.estimate(config.seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; absent for a single member.
    pub std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RpeSummary {
    pub estimates: Vec<PhaseEstimate>,
    /// Cluster of each estimate, parallel to `estimates`.
    pub cluster_ids: Vec<usize>,
    /// Clusters in ascending energy order.
    pub clusters: Vec<ClusterSummary>,
    pub mean: f64,
    pub std: Option<f64>,
}

fn mean_std(x: &[f64]) -> (f64, Option<f64>) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let std = (x.len() > 1)
        .then(|| (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Single-linkage clusters: sorted energies split wherever neighbours are
/// more than `width` apart. Ids ascend with energy.
pub fn cluster_energies(energies: &[f64], width: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let mut ids = vec![0; energies.len()];
    let mut id = 0;
    for w in 0..order.len() {
        if w > 0 && energies[order[w]] - energies[order[w - 1]] > width {
            id += 1;
        }
        ids[order[w]] = id;
    }
    ids
}

impl RpeSession {
    /// `repetitions` independent estimates with derived seeds, clustered
    /// by energy.
    pub fn repeat(&self, repetitions: usize) -> Result<RpeSummary, RpeError> {
        if repetitions == 0 {
            return Err(RpeError::Argument("repetitions must be at least 1".into()));
        }
        let base = self.config.seed;
        let mut estimates = (0..repetitions as u64)
            .into_par_iter()
            .map(|i| self.estimate(repetition_seed(base, i)))
            .collect::<Result<Vec<_>, _>>()?;
        for e in &mut estimates {
            e.repetitions = repetitions;
        }
        let energies: Vec<f64> = estimates.iter().map(|e| e.energy).collect();
        let cluster_ids = cluster_energies(&energies, CLUSTER_WIDTH_FACTOR * self.config.error_target());
        let n_clusters = cluster_ids.iter().max().map_or(0, |m| m + 1);
        let clusters = (0..n_clusters)
            .map(|c| {
                let members: Vec<f64> = energies
                    .iter()
                    .zip(&cluster_ids)
                    .filter(|(_, &id)| id == c)
                    .map(|(e, _)| *e)
                    .collect();
                let (mean, std) = mean_std(&members);
                ClusterSummary {
                    cluster_id: c,
                    count: members.len(),
                    mean,
                    std,
                }
            })
            .collect();
        let (mean, std) = mean_std(&energies);
        Ok(RpeSummary {
            estimates,
            cluster_ids,
            clusters,
            mean,
            std,
        })
    }
}

pub fn repeat_and_summarize(
    problem: &ProblemDescription,
    ansatz_label: &str,
    config: &RpeConfig,
    repetitions: usize,
) -> Result<RpeSummary, RpeError> {
    RpeSession::from_problem(problem, ansatz_label, *config)?.repeat(repetitions)
}

impl RpeSummary {
    /// `seed,t,bits,phase,energy,std_error,cluster_id` rows.
    pub fn to_csv(&self, step_size: f64) -> String {
        let mut s = String::from("seed,t,bits,phase,energy,std_error,cluster_id\n");
        for (e, c) in self.estimates.iter().zip(&self.cluster_ids) {
            let _ = writeln!(
                s,
                "{},{},{},{:.12},{:.12},{:e},{}",
                e.seed, step_size, e.bits_used, e.phase, e.energy, e.std_error, c
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_phase(0.5), 0.5);
    }

    #[test]
    fn dealias_examples() {
        assert_eq!(dealias_energy(0.0, 1.0, [-0.4, 0.4]).unwrap(), 0.0);
        let e: f64 = -5.38436;
        let t = 0.5;
        let phase = (-e * t).rem_euclid(2.0 * PI);
        assert!((dealias_energy(phase, t, [-6.0, -4.0]).unwrap() - e).abs() < 1e-12);
        assert_eq!(dealias_energy(0.3, 0.5, [-20.0, 20.0]), Err(RpeError::MultipleSolutions));
        assert_eq!(dealias_energy(2.0, 1.0, [0.1, 0.2]), Err(RpeError::NoSolution));
    }

    #[test]
    fn principal_window() {
        let t = 0.5;
        for e in [-7.9, -7.0, -6.5] {
            let phase = wrap_phase(-e * t);
            assert!((principal_energy(phase, t, -7.5) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn error_target() {
        let c = RpeConfig::new(10, 0.5);
        assert!((c.error_target() - 0.5 / 512.0).abs() < 1e-15);
        assert!((c.error_target() - 0.00098).abs() < 1e-5);
        assert_eq!(RpeConfig::new(1, 0.5).error_target(), 0.5);
        assert!(RpeConfig::new(0, 0.5).validate().is_err());
    }

    #[test]
    fn clustering() {
        let ids = cluster_energies(&[1.0, 0.0, 0.05, 1.02, 3.0], 0.1);
        assert_eq!(ids, vec![1, 0, 0, 1, 2]);
    }

    #[test]
    fn seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| repetition_seed(7, i)).collect();
        assert_eq!(s.len(), 100);
    }
}
