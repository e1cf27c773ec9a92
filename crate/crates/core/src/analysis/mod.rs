//! Post-processing of phase-estimation samples: the `E0 + m / r^2`
//! extrapolation over Trotter numbers, point exclusion, Grubbs outlier
//! removal and energy differences in eV.

use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

pub const HARTREE_TO_EV: f64 = 27.211386245988;

/// Chemical accuracy in hartree.
pub const CHEMICAL_ACCURACY: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least 2 included points with distinct Trotter numbers, found {0}")]
    InsufficientPoints(usize),
    #[error("all included points share one Trotter number")]
    SingularDesign,
    #[error("need at least 3 samples, found {0}")]
    InsufficientSamples(usize),
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exclusion {
    Included,
    LargeTrotterError,
    ExcitedState,
    User,
}

impl Exclusion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Exclusion::Included => "none",
            Exclusion::LargeTrotterError => "large_trotter_error",
            Exclusion::ExcitedState => "excited_state",
            Exclusion::User => "user",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub trotter_number: u32,
    pub energy: f64,
    pub sigma: f64,
    pub exclusion: Exclusion,
}

impl SweepPoint {
    pub fn new(trotter_number: u32, energy: f64, sigma: f64) -> Self {
        Self {
            trotter_number,
            energy,
            sigma,
            exclusion: Exclusion::Included,
        }
    }

    pub fn is_included(&self) -> bool {
        self.exclusion == Exclusion::Included
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub e0: f64,
    pub m: f64,
    /// Infinite when the fit has no residual degrees of freedom.
    pub sigma_e0: f64,
    pub sigma_m: f64,
    /// Covariance of `(e0, m)`.
    pub covariance: [[f64; 2]; 2],
    pub n_points_used: usize,
    pub chi_squared: f64,
}

impl FitResult {
    pub fn degrees_of_freedom(&self) -> usize {
        self.n_points_used - 2
    }
}

/// Weighted least squares of `E = e0 + m / r^2` over the included points,
/// weights `1 / sigma^2`. The covariance is `(X^T W X)^-1`, treating the
/// sigmas as known standard errors.
pub fn fit_inverse_square(points: &[SweepPoint]) -> Result<FitResult, AnalysisError> {
    let used: Vec<&SweepPoint> = points.iter().filter(|p| p.is_included()).collect();
    weighted_fit(&used, true)
}

fn weighted_fit(used: &[&SweepPoint], weighted: bool) -> Result<FitResult, AnalysisError> {
    for p in used {
        if p.trotter_number == 0 {
            return Err(AnalysisError::Argument("Trotter number must be positive".into()));
        }
        if weighted && !(p.sigma > 0.0 && p.sigma.is_finite()) {
            return Err(AnalysisError::Argument(format!(
                "sigma must be positive, got {} at r = {}",
                p.sigma, p.trotter_number
            )));
        }
    }
    let mut distinct: Vec<u32> = used.iter().map(|p| p.trotter_number).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if used.len() < 2 {
        return Err(AnalysisError::InsufficientPoints(used.len()));
    }
    if distinct.len() < 2 {
        return Err(AnalysisError::SingularDesign);
    }

    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in used {
        let w = if weighted { p.sigma.powi(-2) } else { 1.0 };
        let x = (p.trotter_number as f64).powi(-2);
        s += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * p.energy;
        sxy += w * x * p.energy;
    }
    let det = s * sxx - sx * sx;
    if !(det > 1e-14 * s * sxx) {
        return Err(AnalysisError::SingularDesign);
    }
    let e0 = (sxx * sy - sx * sxy) / det;
    let m = (s * sxy - sx * sy) / det;
    let chi_squared = used
        .iter()
        .map(|p| {
            let w = if weighted { p.sigma.powi(-2) } else { 1.0 };
            w * (p.energy - e0 - m * (p.trotter_number as f64).powi(-2)).powi(2)
        })
        .sum();
    let n = used.len();
    let covariance = if n == 2 {
        [[f64::INFINITY; 2]; 2]
    } else {
        [[sxx / det, -sx / det], [-sx / det, s / det]]
    };
    Ok(FitResult {
        e0,
        m,
        sigma_e0: covariance[0][0].sqrt(),
        sigma_m: covariance[1][1].sqrt(),
        covariance,
        n_points_used: n,
        chi_squared,
    })
}

/// Thresholds for [`apply_exclusion_rules`]; `None` disables a rule.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExclusionConfig {
    /// Points further than this from the reference energy are excited states.
    pub gap_threshold: Option<f64>,
    /// Points whose fitted Trotter bias `|m| / r^2` exceeds this are dropped.
    pub trotter_error_cap: Option<f64>,
}

impl ExclusionConfig {
    /// Gap threshold of ten phase-estimation error bounds.
    pub fn for_error_bound(bound: f64, trotter_error_cap: Option<f64>) -> Self {
        Self {
            gap_threshold: Some(10.0 * bound),
            trotter_error_cap,
        }
    }
}

/// Flags excited-state and large-Trotter-error points.
///
/// The excited-state reference is `ground_energy_hint` when given and
/// otherwise the lowest included energy sharing the point's Trotter number.
/// The Trotter bias comes from an unweighted preliminary fit of the points
/// still included after the excited-state pass. Points already excluded
/// keep their flag.
pub fn apply_exclusion_rules(
    points: &[SweepPoint],
    ground_energy_hint: Option<f64>,
    config: &ExclusionConfig,
) -> Vec<SweepPoint> {
    let mut out = points.to_vec();
    if let Some(gap) = config.gap_threshold {
        let reference: Vec<Option<f64>> = out
            .iter()
            .map(|p| {
                ground_energy_hint.or_else(|| {
                    points
                        .iter()
                        .filter(|q| q.is_included() && q.trotter_number == p.trotter_number)
                        .map(|q| q.energy)
                        .min_by(f64::total_cmp)
                })
            })
            .collect();
        for (p, r) in out.iter_mut().zip(reference) {
            if let (true, Some(r)) = (p.is_included(), r) {
                if (p.energy - r).abs() > gap {
                    p.exclusion = Exclusion::ExcitedState;
                }
            }
        }
    }
    if let Some(cap) = config.trotter_error_cap {
        let used: Vec<&SweepPoint> = out.iter().filter(|p| p.is_included()).collect();
        if let Ok(fit) = weighted_fit(&used, false) {
            for p in out.iter_mut().filter(|p| p.is_included()) {
                if fit.m.abs() / (p.trotter_number as f64).powi(2) > cap {
                    p.exclusion = Exclusion::LargeTrotterError;
                }
            }
        }
    }
    out
}

/// Smallest `r >= 1` with `|m| / r^2 <= 0.001`.
pub fn chemical_accuracy_trotter_number(m: f64) -> u64 {
    let m = m.abs();
    let ok = |r: u64| m / (r as f64).powi(2) <= CHEMICAL_ACCURACY;
    let mut r = ((m / CHEMICAL_ACCURACY).sqrt().ceil() as u64).max(1);
    while r > 1 && ok(r - 1) {
        r -= 1;
    }
    while !ok(r) {
        r += 1;
    }
    r
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrubbsOutcome {
    pub kept: Vec<f64>,
    pub removed: Vec<f64>,
}

/// Two-sided Grubbs critical value for `n` samples at level `alpha`.
pub fn grubbs_critical_value(n: usize, alpha: f64) -> Result<f64, AnalysisError> {
    if n < 3 {
        return Err(AnalysisError::InsufficientSamples(n));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnalysisError::Argument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let nf = n as f64;
    let dist = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| AnalysisError::Argument(e.to_string()))?;
    let t = dist.inverse_cdf(1.0 - alpha / (2.0 * nf));
    Ok((nf - 1.0) / nf.sqrt() * (t * t / (nf - 2.0 + t * t)).sqrt())
}

fn mean_and_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Repeatedly removes the most extreme sample while its Grubbs statistic
/// exceeds the two-sided critical value, stopping at 2 samples.
pub fn grubbs_filter(samples: &[f64], alpha: f64) -> Result<GrubbsOutcome, AnalysisError> {
    if samples.len() < 3 {
        return Err(AnalysisError::InsufficientSamples(samples.len()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(AnalysisError::Argument("samples must be finite".into()));
    }
    let mut kept = samples.to_vec();
    let mut removed = Vec::new();
    while kept.len() > 2 {
        let (mean, sd) = mean_and_sd(&kept);
        if sd == 0.0 {
            break;
        }
        let (idx, dev) = kept
            .iter()
            .map(|x| (x - mean).abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if dev / sd <= grubbs_critical_value(kept.len(), alpha)? {
            break;
        }
        removed.push(kept.remove(idx));
    }
    Ok(GrubbsOutcome { kept, removed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyDifference {
    /// `mean(a) - mean(b)` in eV.
    pub delta_ev: f64,
    /// Standard error of the difference in eV.
    pub sigma_ev: f64,
    pub kept_a: usize,
    pub kept_b: usize,
}

/// Difference of Grubbs-filtered means, in eV, with the standard errors of
/// the two means added in quadrature.
pub fn energy_difference_report(samples_a: &[f64], samples_b: &[f64], alpha: f64) -> Result<EnergyDifference, AnalysisError> {
    let a = grubbs_filter(samples_a, alpha)?.kept;
    let b = grubbs_filter(samples_b, alpha)?.kept;
    let (ma, sa) = mean_and_sd(&a);
    let (mb, sb) = mean_and_sd(&b);
    let se = (sa * sa / a.len() as f64 + sb * sb / b.len() as f64).sqrt();
    Ok(EnergyDifference {
        delta_ev: (ma - mb) * HARTREE_TO_EV,
        sigma_ev: se * HARTREE_TO_EV,
        kept_a: a.len(),
        kept_b: b.len(),
    })
}

/// `e0,sigma_e0,m,sigma_m,r_star,n_used`.
pub fn fit_report_csv(fit: &FitResult) -> String {
    format!(
        "e0,sigma_e0,m,sigma_m,r_star,n_used\n{:.12},{:e},{:.12},{:e},{},{}\n",
        fit.e0,
        fit.sigma_e0,
        fit.m,
        fit.sigma_m,
        chemical_accuracy_trotter_number(fit.m),
        fit.n_points_used
    )
}

/// `r,energy,sigma,excluded,reason`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("r,energy,sigma,excluded,reason\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{:.12},{:e},{},{}",
            p.trotter_number,
            p.energy,
            p.sigma,
            !p.is_included(),
            p.exclusion.as_str()
        );
    }
    s
}
