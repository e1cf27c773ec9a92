use proptest::prelude::*;
use qchem_core::analysis::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

/// Student-t CDF with x = sqrt(nu) tan(theta): the density becomes
/// proportional to cos^(nu - 1)(theta), integrated by Simpson's rule.
fn t_cdf(t: f64, nu: f64) -> f64 {
    let f = |th: f64| th.cos().max(0.0).powf(nu - 1.0);
    let simpson = |a: f64, b: f64| {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    simpson(-FRAC_PI_2, (t / nu.sqrt()).atan()) / simpson(-FRAC_PI_2, FRAC_PI_2)
}

fn t_quantile(p: f64, nu: f64) -> f64 {
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, nu) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_critical(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    let t = t_quantile(1.0 - alpha / (2.0 * nf), nf - 2.0);
    (nf - 1.0) / nf.sqrt() * (t * t / (nf - 2.0 + t * t)).sqrt()
}

#[test]
fn grubbs_critical_values_match_quadrature_oracle() {
    for n in [3usize, 4, 5, 7, 10, 20, 40] {
        let ours = grubbs_critical_value(n, 0.05).unwrap();
        let oracle = oracle_critical(n, 0.05);
        assert!((ours - oracle).abs() < 1e-6, "n={n}: {ours} vs {oracle}");
    }
    // tabulated two-sided 5% values
    assert!((grubbs_critical_value(3, 0.05).unwrap() - 1.155).abs() < 1e-3);
    assert!((grubbs_critical_value(10, 0.05).unwrap() - 2.290).abs() < 1e-3);
}

#[test]
fn grubbs_example_statistics_against_oracle() {
    let x = [1.0, 1.1, 0.9, 1.05];
    let mean = x.iter().sum::<f64>() / 4.0;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
    let g = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / sd;
    assert!(g < oracle_critical(4, 0.05));
    assert!(grubbs_filter(&x, 0.05).unwrap().removed.is_empty());
}

#[test]
fn noisy_inverse_square_fit_is_calibrated() {
    let rs: Vec<u32> = (2..=10).collect();
    let mut e0s = Vec::new();
    let mut sig = 0.0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<SweepPoint> = rs
            .iter()
            .map(|&r| {
                let noise: f64 = rng.sample(rand_distr_normal());
                SweepPoint::new(r, -1.0 + 0.2 / (r as f64).powi(2) + 1e-3 * noise, 1e-3)
            })
            .collect();
        let fit = fit_inverse_square(&pts).unwrap();
        e0s.push(fit.e0);
        sig = fit.sigma_e0;
    }
    let mean = e0s.iter().sum::<f64>() / 50.0;
    assert!((mean + 1.0).abs() < 3.0 * sig, "{mean} vs sigma {sig}");
}

/// Standard normal by Box-Muller over the uniform sampler.
fn rand_distr_normal() -> impl rand::distributions::Distribution<f64> {
    struct Normal;
    impl rand::distributions::Distribution<f64> for Normal {
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }
    Normal
}

fn sweep() -> impl Strategy<Value = Vec<SweepPoint>> {
    prop::collection::vec((1u32..40, -5.0f64..5.0, 0.01f64..1.0), 3..12).prop_filter_map("distinct r", |v| {
        let mut rs: Vec<u32> = v.iter().map(|p| p.0).collect();
        rs.sort_unstable();
        rs.dedup();
        (rs.len() >= 3).then(|| v.into_iter().map(|(r, e, s)| SweepPoint::new(r, e, s)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normal_equations_hold(points in sweep()) {
        let fit = fit_inverse_square(&points).unwrap();
        let (mut g1, mut g2, mut scale) = (0.0, 0.0, 0.0);
        for p in &points {
            let x = (p.trotter_number as f64).powi(-2);
            let w = p.sigma.powi(-2);
            let res = p.energy - fit.e0 - fit.m * x;
            g1 += w * res;
            g2 += w * res * x;
            scale += w * p.energy.abs();
        }
        prop_assert!(g1.abs() <= 1e-10 * scale.max(1.0));
        prop_assert!(g2.abs() <= 1e-10 * scale.max(1.0));
        prop_assert!(fit.covariance[0][1] == fit.covariance[1][0]);
        let det = fit.covariance[0][0] * fit.covariance[1][1] - fit.covariance[0][1].powi(2);
        prop_assert!(fit.covariance[0][0] >= 0.0 && det >= -1e-9 * fit.covariance[0][0] * fit.covariance[1][1]);
    }

    #[test]
    fn fit_is_equivariant(points in sweep(), c in -3.0f64..3.0, k in 0.1f64..10.0) {
        let base = fit_inverse_square(&points).unwrap();
        let shifted: Vec<SweepPoint> = points.iter().map(|p| SweepPoint { energy: p.energy + c, ..*p }).collect();
        let fs = fit_inverse_square(&shifted).unwrap();
        prop_assert!((fs.e0 - base.e0 - c).abs() < 1e-8 * (1.0 + base.e0.abs()));
        prop_assert!((fs.m - base.m).abs() < 1e-7 * (1.0 + base.m.abs()));
        let scaled: Vec<SweepPoint> = points.iter().map(|p| SweepPoint { sigma: p.sigma * k, ..*p }).collect();
        let fk = fit_inverse_square(&scaled).unwrap();
        prop_assert!((fk.e0 - base.e0).abs() < 1e-8 * (1.0 + base.e0.abs()));
        prop_assert!((fk.m - base.m).abs() < 1e-7 * (1.0 + base.m.abs()));
    }

    #[test]
    fn grubbs_is_idempotent(x in prop::collection::vec(-10.0f64..10.0, 3..30), outlier in 50.0f64..500.0) {
        let mut x = x;
        x.push(outlier);
        let once = grubbs_filter(&x, 0.05).unwrap();
        prop_assume!(once.kept.len() >= 3);
        let twice = grubbs_filter(&once.kept, 0.05).unwrap();
        prop_assert!(twice.removed.is_empty());
    }

    #[test]
    fn chemical_accuracy_is_minimal(m in -100.0f64..100.0) {
        let r = chemical_accuracy_trotter_number(m);
        prop_assert!(m.abs() / (r as f64).powi(2) <= 1e-3);
        if r >= 2 {
            prop_assert!(m.abs() / ((r - 1) as f64).powi(2) > 1e-3);
        }
    }
}
