//! Monte Carlo side: exact mutual information and resolvent statistics of
//! sampled matrices, reproducible replicate experiments, the quadratic-form
//! covariance oracle and the bias comparison.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deterministic::{fluctuation_report, FluctuationReport};
use crate::equilibrium::{solve_fundamental, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{cmul, gram, hermitian_eigenvalues, log_det_hpd, trace_inverse_hpd, CMatrix};
use crate::model::{replicate_rng, sample_sigma, z_score, EntryDistribution, EntryKind, ModelSpec};
use crate::quadrature::GaussLegendre;

fn check_finite(sigma: &CMatrix) -> Result<()> {
    if sigma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("sigma has non-finite entries".into()));
    }
    Ok(())
}

fn shifted_gram(sigma: &CMatrix, rho: f64) -> CMatrix {
    let mut g = gram(sigma);
    for i in 0..g.nrows() {
        g[(i, i)] += rho;
    }
    g
}

/// `I_n(ρ) = N^{-1} log det(ΣΣ^* + ρI_N)`.
pub fn mutual_info(sigma: &CMatrix, rho: f64) -> Result<f64> {
    check_finite(sigma)?;
    if !(rho > 0.0) {
        return Err(Error::Input(format!("rho must be positive, got {rho}")));
    }
    Ok(log_det_hpd(&shifted_gram(sigma, rho))? / sigma.nrows() as f64)
}

/// `N^{-1} Σ_i log(λ_i + ρ)` over the eigenvalues of `ΣΣ^*`.
pub fn mutual_info_eigen(sigma: &CMatrix, rho: f64) -> f64 {
    let ev = hermitian_eigenvalues(&gram(sigma));
    ev.iter().map(|l| (l + rho).ln()).sum::<f64>() / ev.len() as f64
}

/// `f_n(z) = N^{-1} Tr(ΣΣ^* - zI)^{-1}` for `z < 0`.
pub fn stieltjes_trace(sigma: &CMatrix, z: f64) -> Result<f64> {
    check_finite(sigma)?;
    if !(z < 0.0) {
        return Err(Error::Input(format!("z must be negative, got {z}")));
    }
    Ok(trace_inverse_hpd(&shifted_gram(sigma, -z))? / sigma.nrows() as f64)
}

/// `log ρ + ∫_ρ^U (1/w - f_n(-w)) dw + N^{-1} Tr(ΣΣ^*)/U`, the integral
/// representation of `I_n(ρ)` truncated at `U = upper_cut`. The integral is
/// taken in `s = log w` with composite Gauss–Legendre panels of 64 nodes.
pub fn integral_representation(sigma: &CMatrix, rho: f64, upper_cut: f64, n_quad: usize) -> Result<f64> {
    check_finite(sigma)?;
    if !(rho > 0.0 && upper_cut > rho) {
        return Err(Error::Input("need 0 < rho < upper_cut".into()));
    }
    let nr = sigma.nrows() as f64;
    let g = gram(sigma);
    let per_panel = n_quad.clamp(1, 64);
    let panels = n_quad.div_ceil(per_panel).max(1);
    let gl = GaussLegendre::new(per_panel);
    let mut failure = None;
    let integral = gl.integrate(rho.ln(), upper_cut.ln(), panels, |s| {
        let w = s.exp();
        let mut shifted = g.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += w;
        }
        match trace_inverse_hpd(&shifted) {
            // (1/w - f_n(-w)) dw = (1 - w f_n(-w)) ds
            Ok(tr) => 1.0 - w * tr / nr,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let tail = g.trace().re / nr / upper_cut;
    Ok(rho.ln() + integral + tail)
}

/// `|integral_representation - mutual_info|`.
pub fn integral_representation_check(sigma: &CMatrix, rho: f64, upper_cut: f64, n_quad: usize) -> Result<f64> {
    Ok((integral_representation(sigma, rho, upper_cut, n_quad)? - mutual_info(sigma, rho)?).abs())
}

/// One Monte Carlo experiment: `replicates` draws of `Σ` at `ρ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MCConfig {
    pub spec: ModelSpec,
    pub rho: f64,
    pub replicates: usize,
    pub master_seed: u64,
    /// Worker threads; never affects the output.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

impl MCConfig {
    pub fn new(spec: ModelSpec, rho: f64, replicates: usize, master_seed: u64) -> Self {
        Self {
            spec,
            rho,
            replicates,
            master_seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Config("at least 2 replicates are required".into()));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of everything that determines the
    /// output (the worker count is excluded).
    pub fn digest(&self) -> String {
        let doc = serde_json::json!({
            "spec": self.spec,
            "rho": self.rho,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
        });
        hex::encode(Sha256::digest(doc.to_string().as_bytes()))
    }
}

/// Evaluates `stat` on every replicate `Σ`, in replicate order, on a pool
/// of `cfg.workers` threads.
pub fn run_replicates<F>(cfg: &MCConfig, stat: F) -> Result<Vec<f64>>
where
    F: Fn(&CMatrix) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let job = |r: u64| -> Result<f64> {
        let s = sample_sigma(&cfg.spec, cfg.master_seed, r);
        stat(&s.sigma).map_err(|e| Error::Replicate {
            index: r,
            source: Box::new(e),
        })
    };
    let reps = cfg.replicates as u64;
    if cfg.workers == 1 {
        return (0..reps).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| (0..reps).into_par_iter().map(job).collect())
}

/// Replicate values of `I_n(ρ)` with their summary and both standardizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MCResult {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Unbiased sample variance of `I_n`.
    pub variance: f64,
    /// `N(I_n - mean)/√Θ`.
    pub standardized: Vec<f64>,
    /// `N(I_n - V)/√Θ`.
    pub standardized_v: Vec<f64>,
    #[serde(rename = "N")]
    pub n_rows: usize,
    pub theta: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub config_digest: String,
}

/// Mean and unbiased variance, summed in index order.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, if values.len() > 1 { ss / (n - 1.0) } else { f64::NAN })
}

impl MCResult {
    pub fn from_values(values: Vec<f64>, n_rows: usize, report: &FluctuationReport, config_digest: String) -> Self {
        let (mean, variance) = mean_variance(&values);
        let nr = n_rows as f64;
        let scale = nr / report.theta.sqrt();
        let standardized = values.iter().map(|x| (x - mean) * scale).collect();
        let standardized_v = values.iter().map(|x| (x - report.v) * scale).collect();
        Self {
            values,
            mean,
            variance,
            standardized,
            standardized_v,
            n_rows,
            theta: report.theta,
            v: report.v,
            config_digest,
        }
    }

    /// Empirical variance of `N·I_n`.
    pub fn scaled_variance(&self) -> f64 {
        self.variance * (self.n_rows as f64).powi(2)
    }

    /// CSV with one row per replicate: `index,I_n,standardized`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,I_n,standardized\n");
        for (i, (x, z)) in self.values.iter().zip(&self.standardized).enumerate() {
            out.push_str(&format!("{i},{x:.17e},{z:.17e}\n"));
        }
        out
    }

    pub fn summary(&self) -> MCSummary {
        MCSummary {
            schema_version: 1,
            replicates: self.values.len(),
            mean: self.mean,
            variance: self.variance,
            scaled_variance: self.scaled_variance(),
            theta: self.theta,
            v: self.v,
            variance_ratio: self.scaled_variance() / self.theta,
            config_digest: self.config_digest.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MCSummary {
    pub schema_version: u32,
    pub replicates: usize,
    pub mean: f64,
    pub variance: f64,
    pub scaled_variance: f64,
    pub theta: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub variance_ratio: f64,
    pub config_digest: String,
}

/// Deterministic report for the experiment's `(spec, ρ)`.
pub fn experiment_report(cfg: &MCConfig) -> Result<FluctuationReport> {
    let sol = solve_fundamental(&cfg.spec, cfg.rho, &SolverOptions::default())?;
    fluctuation_report(&cfg.spec, &sol)
}

/// Runs the experiment; the output is a pure function of `cfg` minus the
/// worker count.
pub fn run_experiment(cfg: &MCConfig) -> Result<MCResult> {
    cfg.validate()?;
    let report = experiment_report(cfg)?;
    run_experiment_with_report(cfg, &report)
}

pub fn run_experiment_with_report(cfg: &MCConfig, report: &FluctuationReport) -> Result<MCResult> {
    let rho = cfg.rho;
    let values = run_replicates(cfg, |s| mutual_info(s, rho))?;
    Ok(MCResult::from_values(values, cfg.spec.n_rows(), report, cfg.digest()))
}

/// Replicate values of `n^{-1} Tr Q(-ρ)` with `Q(z) = (ΣΣ^* - zI)^{-1}`.
pub fn resolvent_traces(cfg: &MCConfig) -> Result<Vec<f64>> {
    let (rho, nr, nc) = (cfg.rho, cfg.spec.n_rows() as f64, cfg.spec.n_cols() as f64);
    run_replicates(cfg, |s| Ok(stieltjes_trace(s, -rho)? * nr / nc))
}

/// Outcome of comparing `N(mean - V)` with its predicted limit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BiasComparison {
    pub empirical_bias: f64,
    /// `B_n` for `A = 0`, `0` for circular Gaussian entries.
    pub predicted: f64,
    /// `√(Θ/R)`, the standard error of the mean of `N·I_n`.
    pub std_error: f64,
    pub z_score: f64,
}

/// Predicted bias limit, when one is known for the model.
pub fn predicted_bias(spec: &ModelSpec, report: &FluctuationReport) -> Result<f64> {
    if let Some(b) = report.bias {
        return Ok(b);
    }
    if spec.dist().kind() == EntryKind::ComplexGaussianCircular {
        return Ok(0.0);
    }
    Err(Error::Unsupported(
        "no bias formula for A != 0 with non-Gaussian or non-circular entries".into(),
    ))
}

pub fn compare_bias(spec: &ModelSpec, mc: &MCResult, report: &FluctuationReport) -> Result<BiasComparison> {
    let predicted = predicted_bias(spec, report)?;
    let r = mc.values.len() as f64;
    let empirical_bias = spec.n_rows() as f64 * (mc.mean - report.v);
    let std_error = (report.theta / r).sqrt();
    Ok(BiasComparison {
        empirical_bias,
        predicted,
        std_error,
        z_score: (empirical_bias - predicted) / std_error,
    })
}

/// Runs the experiment and compares its bias against the prediction.
pub fn bias_experiment(cfg: &MCConfig) -> Result<BiasComparison> {
    cfg.validate()?;
    let report = experiment_report(cfg)?;
    predicted_bias(&cfg.spec, &report)?;
    let mc = run_experiment_with_report(cfg, &report)?;
    compare_bias(&cfg.spec, &mc, &report)
}

/// Inputs of the quadratic-form covariance identity: `Υ(M) = (y+u)^* M (y+u)`
/// with `y = N^{-1/2} D^{1/2} x`.
#[derive(Debug, Clone)]
pub struct QuadraticFormSetup {
    pub dist: EntryDistribution,
    pub d: Vec<f64>,
    pub m: CMatrix,
    pub p: CMatrix,
    pub u: Vec<Complex64>,
}

impl QuadraticFormSetup {
    fn size(&self) -> usize {
        self.d.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.size();
        if n == 0 || self.u.len() != n || self.m.shape() != (n, n) || self.p.shape() != (n, n) {
            return Err(Error::Input("M, P must be N x N and u of length N".into()));
        }
        if self.d.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::Input("D must be nonnegative".into()));
        }
        Ok(())
    }

    /// `E Υ(M) = N^{-1} Tr DM + u^* M u`.
    pub fn mean(&self, m: &CMatrix) -> Complex64 {
        let n = self.size() as f64;
        let tr: Complex64 = self.d.iter().enumerate().map(|(i, d)| m[(i, i)] * *d).sum();
        tr / n + quad(&self.u, m, &self.u)
    }

    /// Right-hand side of the covariance identity
    /// `E[(Υ(M) - EΥ(M))(Υ(P) - EΥ(P))]`.
    pub fn closed_form(&self) -> Complex64 {
        let nn = self.size();
        let n = nn as f64;
        let (m, p, u, d) = (&self.m, &self.p, &self.u, &self.d);
        let vartheta = self.dist.vartheta();
        let varsigma = self.dist.varsigma();
        let kappa = self.dist.kappa();
        let dm = diag_scale(d, 1.0);
        let d32 = diag_scale(d, 1.5);
        let ubar: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        let mt = m.transpose();
        let pt = p.transpose();

        let tr_mdpd = cmul(&cmul(m, &dm), &cmul(p, &dm)).trace();
        let tr_mdptd = cmul(&cmul(m, &dm), &cmul(&pt, &dm)).trace();
        let mdp = cmul(&cmul(m, &dm), p);
        let pdm = cmul(&cmul(p, &dm), m);
        let pdmt = cmul(&cmul(p, &dm), &mt);
        let mtdp = cmul(&cmul(&mt, &dm), p);
        let vdiag_m: Vec<Complex64> = (0..nn).map(|i| m[(i, i)]).collect();
        let vdiag_p: Vec<Complex64> = (0..nn).map(|i| p[(i, i)]).collect();
        let pd32 = cmul(p, &d32);
        let md32 = cmul(m, &d32);
        let d32m = cmul(&d32, m);
        let d32p = cmul(&d32, p);

        let mut total = tr_mdpd / (n * n);
        total += (quad(u, &mdp, u) + quad(u, &pdm, u)) / n;
        total += tr_mdptd * vartheta.norm_sqr() / (n * n);
        total += vartheta * quad(u, &pdmt, &ubar) / n;
        total += vartheta.conj() * quad(&ubar, &mtdp, u) / n;
        let n32 = n.powf(1.5);
        total += varsigma * (quad(u, &pd32, &vdiag_m) + quad(u, &md32, &vdiag_p)) / n32;
        total += varsigma.conj() * (bilinear(&vdiag_p, &d32m, u) + bilinear(&vdiag_m, &d32p, u)) / n32;
        let diag: Complex64 = (0..nn).map(|i| m[(i, i)] * p[(i, i)] * (d[i] * d[i])).sum();
        total + diag * kappa / (n * n)
    }
}

fn diag_scale(d: &[f64], power: f64) -> CMatrix {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(d[i].powf(power), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `a^* M b`.
fn quad(a: &[Complex64], m: &CMatrix, b: &[Complex64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            s += ai.conj() * m[(i, j)] * bj;
        }
    }
    s
}

/// `a^T M b`.
fn bilinear(a: &[Complex64], m: &CMatrix, b: &[Complex64]) -> Complex64 {
    let conj: Vec<Complex64> = a.iter().map(|z| z.conj()).collect();
    quad(&conj, m, b)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CovarianceReport {
    pub n_samples: usize,
    pub estimate: Complex64,
    pub closed_form: Complex64,
    pub std_error: Complex64,
    /// Larger of the real and imaginary z-scores.
    pub z_score: f64,
    /// z-scores of the empirical means of `Υ(M)` and `Υ(P)`.
    pub mean_z_scores: (f64, f64),
}

/// Component-wise z-score; standard errors are floored at the rounding
/// level `1e-12 · scale`.
fn split_z(diff: Complex64, se: Complex64, scale: f64) -> f64 {
    let floor = 1e-12 * scale;
    let zr = z_score(diff.re, se.re.max(floor));
    let zi = z_score(diff.im, se.im.max(floor));
    if zr.abs() >= zi.abs() {
        zr
    } else {
        zi
    }
}

fn mean_and_se(values: &[Complex64]) -> (Complex64, Complex64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    let (mut vr, mut vi) = (0.0, 0.0);
    for z in values {
        vr += (z.re - mean.re).powi(2);
        vi += (z.im - mean.im).powi(2);
    }
    let se = Complex64::new((vr / (n - 1.0) / n).sqrt(), (vi / (n - 1.0) / n).sqrt());
    (mean, se)
}

/// Brute-force Monte Carlo estimate of the covariance of `Υ(M)` and `Υ(P)`
/// compared with the closed form.
pub fn covariance_identity_oracle(setup: &QuadraticFormSetup, n_samples: usize, seed: u64) -> Result<CovarianceReport> {
    setup.check()?;
    if n_samples < 100_000 {
        return Err(Error::InsufficientSamples {
            needed: 100_000,
            got: n_samples,
        });
    }
    let nn = setup.size();
    let scale: Vec<f64> = setup.d.iter().map(|d| (d / nn as f64).sqrt()).collect();
    let mut rng = replicate_rng(seed, 0);
    let mut ups_m = Vec::with_capacity(n_samples);
    let mut ups_p = Vec::with_capacity(n_samples);
    let mut v = vec![Complex64::new(0.0, 0.0); nn];
    for _ in 0..n_samples {
        for i in 0..nn {
            v[i] = setup.dist.sample(&mut rng) * scale[i] + setup.u[i];
        }
        ups_m.push(quad(&v, &setup.m, &v));
        ups_p.push(quad(&v, &setup.p, &v));
    }
    let (mean_m, se_m) = mean_and_se(&ups_m);
    let (mean_p, se_p) = mean_and_se(&ups_p);
    let products: Vec<Complex64> = ups_m
        .iter()
        .zip(&ups_p)
        .map(|(a, b)| (a - mean_m) * (b - mean_p))
        .collect();
    let (raw, se) = mean_and_se(&products);
    let n = n_samples as f64;
    let estimate = raw * (n / (n - 1.0));
    let closed_form = setup.closed_form();
    Ok(CovarianceReport {
        n_samples,
        estimate,
        closed_form,
        std_error: se,
        z_score: split_z(estimate - closed_form, se, estimate.norm() + closed_form.norm()),
        mean_z_scores: (
            split_z(mean_m - setup.mean(&setup.m), se_m, mean_m.norm()),
            split_z(mean_p - setup.mean(&setup.p), se_p, mean_p.norm()),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::specular;

    fn sample_matrix(nr: usize, nc: usize, salt: u64) -> CMatrix {
        let spec = ModelSpec::identity_profiles(CMatrix::zeros(nr, nc), EntryDistribution::complex_gaussian()).unwrap();
        sample_sigma(&spec, 99, salt).sigma
    }

    #[test]
    fn mutual_info_trivial_cases() {
        let zero = CMatrix::zeros(4, 3);
        assert!((mutual_info(&zero, 2.5).unwrap() - 2.5f64.ln()).abs() < 1e-15);
        let eye = CMatrix::identity(5, 5);
        assert!((mutual_info(&eye, 0.7).unwrap() - 1.7f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn mutual_info_matches_eigenvalues() {
        for salt in 0..5 {
            let s = sample_matrix(3, 3, salt);
            assert!((mutual_info(&s, 1.0).unwrap() - mutual_info_eigen(&s, 1.0)).abs() < 1e-10);
            let s = sample_matrix(32, 20, salt);
            assert!((mutual_info(&s, 0.3).unwrap() - mutual_info_eigen(&s, 0.3)).abs() < 1e-9);
        }
    }

    #[test]
    fn mutual_info_rejects_non_finite() {
        let mut s = CMatrix::zeros(2, 2);
        s[(0, 1)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(matches!(mutual_info(&s, 1.0), Err(Error::Input(_))));
    }

    #[test]
    fn stieltjes_trace_values() {
        assert!((stieltjes_trace(&CMatrix::zeros(3, 2), -4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((stieltjes_trace(&CMatrix::identity(3, 3), -1.0).unwrap() - 0.5).abs() < 1e-15);
        let s = sample_matrix(6, 9, 1);
        let f = stieltjes_trace(&s, -2.0).unwrap();
        assert!(f > 0.0 && f < 0.5);
        assert!(stieltjes_trace(&s, 1.0).is_err());
    }

    #[test]
    fn integral_representation_cases() {
        let err = integral_representation_check(&CMatrix::zeros(3, 3), 1.0, 1e6, 1024).unwrap();
        assert!(err <= 1e-14, "{err}");
        let err = integral_representation_check(&CMatrix::identity(4, 4), 1.0, 1e6, 1024).unwrap();
        assert!(err <= 1e-6, "{err}");
        let s = sample_matrix(8, 8, 3);
        let err = integral_representation_check(&s, 1.0, 1e6 * (1.0 + 16.0), 1000).unwrap();
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn replicates_are_deterministic_and_worker_independent() {
        let spec =
            ModelSpec::identity_profiles(specular::rank_one(6, 5, 1.0), EntryDistribution::complex_gaussian()).unwrap();
        let cfg = MCConfig::new(spec, 1.0, 24, 7);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg.clone().with_workers(3)).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.config_digest, b.config_digest);
        let (m, v) = mean_variance(&a.values);
        assert_eq!((m, v), (a.mean, a.variance));
        let c = run_experiment(&MCConfig {
            master_seed: 8,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a.values, c.values);
        assert_ne!(a.config_digest, c.config_digest);
        assert!(a.to_csv().lines().count() == 25);
    }

    #[test]
    fn config_validation() {
        let spec = ModelSpec::identity_profiles(CMatrix::zeros(2, 2), EntryDistribution::complex_gaussian()).unwrap();
        assert!(run_experiment(&MCConfig::new(spec.clone(), 1.0, 1, 0)).is_err());
        assert!(run_experiment(&MCConfig::new(spec, -1.0, 10, 0)).is_err());
    }

    #[test]
    fn bias_unsupported_for_rician_non_gaussian() {
        let spec = ModelSpec::identity_profiles(
            specular::rank_one(4, 4, 1.0),
            EntryDistribution::new(EntryKind::Qpsk).unwrap(),
        )
        .unwrap();
        let cfg = MCConfig::new(spec, 1.0, 10, 0);
        assert!(matches!(bias_experiment(&cfg), Err(Error::Unsupported(_))));
    }

    fn unit_setup(kind: EntryKind) -> QuadraticFormSetup {
        QuadraticFormSetup {
            dist: EntryDistribution::new(kind).unwrap(),
            d: vec![1.0; 4],
            m: CMatrix::identity(4, 4),
            p: CMatrix::identity(4, 4),
            u: vec![Complex64::new(0.0, 0.0); 4],
        }
    }

    #[test]
    fn covariance_closed_form_simple_cases() {
        let cf = unit_setup(EntryKind::ComplexGaussianCircular).closed_form();
        assert!((cf - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let cf = unit_setup(EntryKind::RademacherReal).closed_form();
        assert!(cf.norm() < 1e-15);
    }

    #[test]
    fn covariance_oracle_matches_simple_cases() {
        let rep = covariance_identity_oracle(&unit_setup(EntryKind::ComplexGaussianCircular), 200_000, 1).unwrap();
        assert!(rep.z_score.abs() < 5.0, "{rep:?}");
        let rep = covariance_identity_oracle(&unit_setup(EntryKind::RademacherReal), 100_000, 1).unwrap();
        assert_eq!(rep.z_score, 0.0);
        assert!(rep.estimate.norm() < 1e-12);
    }
}
