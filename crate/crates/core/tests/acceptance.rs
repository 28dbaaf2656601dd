use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rmt_clt::montecarlo::{compare_bias, experiment_report, resolvent_traces, run_experiment_with_report};
use rmt_clt::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit_spec(n_rows: usize, n_cols: usize, kind: EntryKind) -> ModelSpec {
    ModelSpec::identity_profiles(CMatrix::zeros(n_rows, n_cols), EntryDistribution::new(kind).unwrap()).unwrap()
}

/// Positive root of `ρδ² + δ(ρ + 1 - c) - c = 0`.
fn quadratic_root(c: f64, rho: f64) -> f64 {
    let b = rho + 1.0 - c;
    (-b + (b * b + 4.0 * rho * c).sqrt()) / (2.0 * rho)
}

fn random_spec(rng: &mut ChaCha20Rng) -> (ModelSpec, f64) {
    let nr = rng.random_range(1..=32);
    let nc = rng.random_range(1..=32);
    let d = (0..nr).map(|_| rng.random_range(0.1..3.0)).collect();
    let dt = (0..nc).map(|_| rng.random_range(0.1..3.0)).collect();
    let a = specular::pseudo_random(nr, nc, rng.random_range(0.0..2.0), rng.random());
    let kinds = [
        EntryKind::ComplexGaussianCircular,
        EntryKind::RealGaussian,
        EntryKind::Qpsk,
        EntryKind::RademacherReal,
        EntryKind::NonCircularGaussian {
            t: rng.random_range(0.0..1.0),
            theta: rng.random_range(0.0..PI),
        },
    ];
    let dist = EntryDistribution::new(kinds[rng.random_range(0..kinds.len())]).unwrap();
    (ModelSpec::new(d, dt, a, dist).unwrap(), rng.random_range(0.1..5.0))
}

fn random_matrix(rng: &mut ChaCha20Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn fixed_point_correctness() -> Outcome {
    let mut worst_err: f64 = 0.0;
    let mut worst_time = Duration::ZERO;
    for c in [0.25, 0.5, 1.0, 2.0] {
        for rho in [0.5, 1.0, 4.0] {
            let n_cols = 32;
            let spec = unit_spec((c * n_cols as f64) as usize, n_cols, EntryKind::ComplexGaussianCircular);
            let mut best = Duration::MAX;
            let mut sol = None;
            for _ in 0..5 {
                let t0 = Instant::now();
                sol = Some(solve_fundamental(&spec, rho, &SolverOptions::default()).unwrap());
                best = best.min(t0.elapsed());
            }
            worst_time = worst_time.max(best);
            worst_err = worst_err.max((sol.unwrap().delta - quadratic_root(c, rho)).abs());
        }
    }
    outcome(
        worst_err <= 1e-10 && worst_time < Duration::from_millis(1),
        format!("max |δ - root| = {worst_err:.2e}, slowest case {worst_time:?}"),
    )
}

fn identity_suite() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (mut cons, mut diag, mut rel): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut bracket_failures = 0;
    for _ in 0..50 {
        let (spec, rho) = random_spec(&mut rng);
        let sol = solve_fundamental(&spec, rho, &SolverOptions::default()).unwrap();
        cons = cons.max(ttilde_consistency_residual(&spec, &sol));
        diag = diag.max(ttilde_diag_identity_residual(&spec, &sol).unwrap());
        let report = fluctuation_report(&spec, &sol).unwrap();
        rel = rel.max((report.bold_delta_n - report.delta).abs() / report.delta);
        bracket_failures += report.bounds.iter().filter(|b| !b.pass).count();
    }
    let elapsed = t0.elapsed();
    outcome(
        cons <= 1e-8 && diag <= 1e-8 && rel <= 1e-8 && bracket_failures == 0 && elapsed < Duration::from_secs(10),
        format!(
            "consistency {cons:.1e}, diagonal {diag:.1e}, Δ coincidence {rel:.1e}, bracket failures {bracket_failures}, {elapsed:?}"
        ),
    )
}

fn covariance_identity() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let kinds = [
        EntryKind::ComplexGaussianCircular,
        EntryKind::RealGaussian,
        EntryKind::Qpsk,
        EntryKind::RademacherReal,
        EntryKind::NonCircularGaussian {
            t: 0.5,
            theta: PI / 6.0,
        },
    ];
    let mut worst: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for k in 0..10 {
        let n = 4;
        let setup = QuadraticFormSetup {
            dist: EntryDistribution::new(kinds[k % kinds.len()]).unwrap(),
            d: (0..n).map(|_| rng.random_range(0.2..2.0)).collect(),
            m: random_matrix(&mut rng, n),
            p: random_matrix(&mut rng, n),
            u: (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        };
        let rep = covariance_identity_oracle(&setup, 1_000_000, 100 + k as u64).unwrap();
        worst = worst.max(rep.z_score.abs());
        worst_mean = worst_mean.max(rep.mean_z_scores.0.abs()).max(rep.mean_z_scores.1.abs());
    }
    let elapsed = t0.elapsed();
    outcome(
        worst <= 5.0 && worst_mean <= 5.0 && elapsed < Duration::from_secs(60),
        format!("max |z| covariance {worst:.2}, mean {worst_mean:.2}, {elapsed:?}"),
    )
}

fn clt_variance() -> Outcome {
    let t0 = Instant::now();
    let cfg = MCConfig::new(unit_spec(64, 64, EntryKind::ComplexGaussianCircular), 1.0, 2000, 4);
    let report = experiment_report(&cfg).unwrap();
    let mc = run_experiment_with_report(&cfg, &report).unwrap();
    let v = clt_verdict(&mc, &report, 0.01, 0.15).unwrap();
    let elapsed = t0.elapsed();
    outcome(
        v.pass && elapsed < Duration::from_secs(120),
        format!(
            "variance ratio {:.4}, KS {:.4} < {:.4}: {}, {elapsed:?}",
            v.variance_ratio, v.ks_statistic, v.ks_threshold, v.ks_pass
        ),
    )
}

fn non_circular_variance() -> Outcome {
    let dist = EntryDistribution::new(EntryKind::NonCircularGaussian {
        t: 0.5,
        theta: PI / 6.0,
    })
    .unwrap();
    let spec = ModelSpec::identity_profiles(specular::rank_one(64, 64, 1.0), dist).unwrap();
    let cfg = MCConfig::new(spec, 1.0, 2000, 5);
    let report = experiment_report(&cfg).unwrap();
    let mc = run_experiment_with_report(&cfg, &report).unwrap();
    let full = mc.scaled_variance() / report.theta;
    let circular = mc.scaled_variance() / report.theta_without_pseudo_variance();
    let gap = report.theta / report.theta_without_pseudo_variance() - 1.0;
    outcome(
        (0.85..=1.15).contains(&full) && !(0.9..=1.1).contains(&circular) && gap > 0.1,
        format!(
            "ratio vs full Θ {full:.4}, vs circular-only {circular:.4}, predicted gap {:.1}%",
            100.0 * gap
        ),
    )
}

fn bias_reproduction() -> Outcome {
    let t0 = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, kind, seed) in [
        ("Rademacher", EntryKind::RademacherReal, 61),
        ("real Gaussian", EntryKind::RealGaussian, 62),
        ("complex Gaussian", EntryKind::ComplexGaussianCircular, 63),
    ] {
        let cfg = MCConfig::new(unit_spec(64, 64, kind), 1.0, 5000, seed);
        let report = experiment_report(&cfg).unwrap();
        let mc = run_experiment_with_report(&cfg, &report).unwrap();
        let b = compare_bias(&cfg.spec, &mc, &report).unwrap();
        pass &= b.z_score.abs() <= 3.0;
        parts.push(format!(
            "{label} {:.4} vs {:.4} (z {:.2})",
            b.empirical_bias, b.predicted, b.z_score
        ));
    }
    let elapsed = t0.elapsed();
    outcome(
        pass && elapsed < Duration::from_secs(300),
        format!("{}, {elapsed:?}", parts.join("; ")),
    )
}

fn integral_representation() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for r in 0..20 {
        let (nr, nc) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let spec = ModelSpec::identity_profiles(
            specular::pseudo_random(nr, nc, rng.random_range(0.0..2.0), r),
            EntryDistribution::complex_gaussian(),
        )
        .unwrap();
        let sigma = sample_sigma(&spec, 7, r).sigma;
        let norm = rmt_clt::linalg::spectral_norm(&sigma);
        let err =
            integral_representation_check(&sigma, rng.random_range(0.1..4.0), 1e6 * (1.0 + norm * norm), 1024).unwrap();
        worst = worst.max(err);
    }
    let elapsed = t0.elapsed();
    outcome(
        worst <= 1e-3 && elapsed < Duration::from_secs(5),
        format!("max error {worst:.2e}, {elapsed:?}"),
    )
}

fn first_order_consistency() -> Outcome {
    let t0 = Instant::now();
    let mut errors = Vec::new();
    for n in [16, 64, 256] {
        let d = (0..n).map(|i| 0.5 + (i % 3) as f64 * 0.5).collect();
        let dt = (0..n).map(|j| 1.5 - (j % 2) as f64).collect();
        let spec = ModelSpec::new(
            d,
            dt,
            specular::rank_one(n, n, 1.0),
            EntryDistribution::complex_gaussian(),
        )
        .unwrap();
        let sol = solve_fundamental(&spec, 1.0, &SolverOptions::default()).unwrap();
        let predicted = sol.t.trace().re / n as f64;
        let traces = resolvent_traces(&MCConfig::new(spec, 1.0, 200, 8)).unwrap();
        let mean = traces.iter().sum::<f64>() / traces.len() as f64;
        errors.push((mean - predicted).abs());
    }
    let elapsed = t0.elapsed();
    outcome(
        errors[0] > errors[1] && errors[1] > errors[2] && errors[2] <= 5e-2 && elapsed < Duration::from_secs(180),
        format!(
            "errors at n = 16, 64, 256: {:.2e}, {:.2e}, {:.2e}, {elapsed:?}",
            errors[0], errors[1], errors[2]
        ),
    )
}

fn determinism() -> Outcome {
    let dist = EntryDistribution::new(EntryKind::Qpsk).unwrap();
    let spec = ModelSpec::new(
        (0..24).map(|i| 0.5 + i as f64 / 24.0).collect(),
        vec![1.0; 16],
        specular::rank_one_phased(24, 16, 1.5),
        dist,
    )
    .unwrap();
    let cfg = MCConfig::new(spec, 0.7, 64, 9);
    let runs: Vec<MCResult> = [1, 1, 2, 8]
        .iter()
        .map(|w| run_experiment(&cfg.clone().with_workers(*w)).unwrap())
        .collect();
    let identical = runs.windows(2).all(|w| {
        w[0].values
            .iter()
            .map(|x| x.to_bits())
            .eq(w[1].values.iter().map(|x| x.to_bits()))
            && w[0].mean.to_bits() == w[1].mean.to_bits()
            && w[0].variance.to_bits() == w[1].variance.to_bits()
            && w[0].config_digest == w[1].config_digest
    });
    outcome(identical, "workers 1, 1, 2, 8 compared bit for bit".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("fixed-point correctness", fixed_point_correctness),
        ("identity suite", identity_suite),
        ("covariance identity", covariance_identity),
        ("CLT variance", clt_variance),
        ("non-circular variance term", non_circular_variance),
        ("bias reproduction", bias_reproduction),
        ("integral representation", integral_representation),
        ("first-order consistency", first_order_consistency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance {} {name}: {tag} ({})", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
