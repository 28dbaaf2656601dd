use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rmt_clt::linalg::spectral_norm;
use rmt_clt::montecarlo::{experiment_report, run_experiment_with_report};
use rmt_clt::*;

fn mp_unit(kind: EntryKind) -> ModelSpec {
    ModelSpec::identity_profiles(CMatrix::zeros(64, 64), EntryDistribution::new(kind).unwrap()).unwrap()
}

#[test]
fn null_verdicts_pass_across_seeds() {
    let spec = mp_unit(EntryKind::ComplexGaussianCircular);
    let report = experiment_report(&MCConfig::new(spec.clone(), 1.0, 2000, 0)).unwrap();
    let passes = (0..20u64)
        .filter(|seed| {
            let cfg = MCConfig::new(spec.clone(), 1.0, 2000, 1000 + seed);
            let mc = run_experiment_with_report(&cfg, &report).unwrap();
            clt_verdict(&mc, &report, 0.01, 0.15).unwrap().pass
        })
        .count();
    assert!(passes >= 18, "{passes}/20");
}

#[test]
fn verdict_is_deterministic_and_serializes() {
    let cfg = MCConfig::new(mp_unit(EntryKind::ComplexGaussianCircular), 1.0, 200, 11);
    let report = experiment_report(&cfg).unwrap();
    let mc = run_experiment_with_report(&cfg, &report).unwrap();
    let a = clt_verdict(&mc, &report, 0.05, 0.3).unwrap();
    let b = clt_verdict(&mc, &report, 0.05, 0.3).unwrap();
    assert_eq!(a, b);
    assert!((a.ks_threshold - 1.358 / 200f64.sqrt()).abs() < 1e-15);
    let json = serde_json::to_value(a).unwrap();
    assert!(json["pass"].is_boolean());
    assert!(json["variance_ratio"].is_number());
}

#[test]
fn non_circular_rician_verdict_passes() {
    let dist = EntryDistribution::new(EntryKind::NonCircularGaussian {
        t: 0.5,
        theta: PI / 6.0,
    })
    .unwrap();
    let spec = ModelSpec::identity_profiles(specular::rank_one(64, 64, 1.0), dist).unwrap();
    let cfg = MCConfig::new(spec, 1.0, 2000, 21);
    let report = experiment_report(&cfg).unwrap();
    assert!(report.delta_under < 1.0);
    let mc = run_experiment_with_report(&cfg, &report).unwrap();
    let v = clt_verdict(&mc, &report, 0.01, 0.15).unwrap();
    assert!(v.pass, "{v:?}");
}

#[test]
fn rician_circular_gaussian_is_unbiased() {
    let spec = ModelSpec::identity_profiles(
        specular::rank_one_phased(64, 64, 1.0),
        EntryDistribution::complex_gaussian(),
    )
    .unwrap();
    let b = bias_experiment(&MCConfig::new(spec, 1.0, 5000, 31)).unwrap();
    assert_eq!(b.predicted, 0.0);
    assert!(b.z_score.abs() <= 3.0, "{b:?}");
}

#[test]
fn covariance_identity_with_shift_and_qpsk() {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    let n = 4;
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &g + g.adjoint();
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = Complex64::new(1.0, 0.0);
    let setup = QuadraticFormSetup {
        dist: EntryDistribution::new(EntryKind::Qpsk).unwrap(),
        d: vec![1.0; n],
        m: m.clone(),
        p: m,
        u,
    };
    let rep = covariance_identity_oracle(&setup, 1_000_000, 42).unwrap();
    assert!(rep.z_score.abs() <= 5.0, "{rep:?}");
    assert!(rep.mean_z_scores.0.abs() <= 5.0);
}

#[test]
fn sampled_noise_norm_stays_bounded() {
    let spec = ModelSpec::new(
        (0..48).map(|i| 0.5 + (i % 4) as f64 * 0.5).collect(),
        vec![1.0; 32],
        CMatrix::zeros(48, 32),
        EntryDistribution::new(EntryKind::RademacherReal).unwrap(),
    )
    .unwrap();
    // (1 + √(N/n))² · d_max is the bulk edge; allow room for fluctuations.
    let edge = (1.0 + 1.5f64.sqrt()) * 2.0f64.sqrt();
    for r in 0..50 {
        let s = sample_sigma(&spec, 5, r).sigma;
        let norm = spectral_norm(&s);
        assert!(norm.is_finite() && norm < 1.5 * edge, "{norm}");
    }
}
