//! The random matrix model `Σ = n^{-1/2} D^{1/2} X D̃^{1/2} + A`, the
//! admissible entry distributions and reproducible sampling.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, CMatrix};

/// Law of the iid entries `X_ij`. Every kind is centered with unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum EntryKind {
    /// Real and imaginary parts iid `N(0, 1/2)`.
    ComplexGaussianCircular,
    RealGaussian,
    /// Uniform on `{±1 ± i}/√2`.
    #[serde(rename = "QPSK")]
    Qpsk,
    /// Uniform on `{-1, +1}`.
    RademacherReal,
    /// `e^{iθ}(√((1+t)/2) G₁ + i √((1-t)/2) G₂)` with `G₁, G₂` iid real
    /// standard Gaussians; pseudo-variance `t e^{2iθ}`.
    NonCircularGaussian {
        t: f64,
        theta: f64,
    },
}

/// Declared moments `(ϑ, κ, ς)` of an entry law: `ϑ = E X²`,
/// `κ = E|X|⁴ - 2 - |ϑ|²`, `ς = E|X|²X`.
pub fn moments_of(kind: EntryKind) -> (Complex64, f64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        EntryKind::ComplexGaussianCircular => (zero, 0.0, zero),
        EntryKind::RealGaussian => (Complex64::new(1.0, 0.0), 0.0, zero),
        EntryKind::Qpsk => (zero, -1.0, zero),
        EntryKind::RademacherReal => (Complex64::new(1.0, 0.0), -2.0, zero),
        EntryKind::NonCircularGaussian { t, theta } => (Complex64::from_polar(t, 2.0 * theta), 0.0, zero),
    }
}

/// An entry law together with its declared moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EntryKind", into = "EntryKind")]
pub struct EntryDistribution {
    kind: EntryKind,
    vartheta: Complex64,
    kappa: f64,
    varsigma: Complex64,
}

impl TryFrom<EntryKind> for EntryDistribution {
    type Error = Error;

    fn try_from(kind: EntryKind) -> Result<Self> {
        Self::new(kind)
    }
}

impl From<EntryDistribution> for EntryKind {
    fn from(d: EntryDistribution) -> Self {
        d.kind
    }
}

impl EntryDistribution {
    pub fn new(kind: EntryKind) -> Result<Self> {
        if let EntryKind::NonCircularGaussian { t, theta } = kind {
            if !(0.0..=1.0).contains(&t) || !theta.is_finite() {
                return Err(Error::Config(format!(
                    "NonCircularGaussian requires t in [0, 1] and finite theta, got t = {t}, theta = {theta}"
                )));
            }
        }
        let (vartheta, kappa, varsigma) = moments_of(kind);
        Ok(Self {
            kind,
            vartheta,
            kappa,
            varsigma,
        })
    }

    pub fn complex_gaussian() -> Self {
        Self::new(EntryKind::ComplexGaussianCircular).unwrap()
    }

    pub fn kind(&self) -> EntryKind {
        self.kind
    }

    /// `ϑ = E X²`.
    pub fn vartheta(&self) -> Complex64 {
        self.vartheta
    }

    /// `κ = E|X|⁴ - 2 - |ϑ|²`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `ς = E|X|²X`.
    pub fn varsigma(&self) -> Complex64 {
        self.varsigma
    }

    /// `E|X|⁴` implied by the declared moments.
    pub fn fourth_abs_moment(&self) -> f64 {
        self.kappa + 2.0 + self.vartheta.norm_sqr()
    }

    /// Draws one entry.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.kind {
            EntryKind::ComplexGaussianCircular => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
            EntryKind::RealGaussian => Complex64::new(rng.sample(StandardNormal), 0.0),
            EntryKind::Qpsk => {
                let bits: u32 = rng.random();
                let re = if bits & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                let im = if bits & 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                Complex64::new(re, im)
            }
            EntryKind::RademacherReal => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(sign, 0.0)
            }
            EntryKind::NonCircularGaussian { t, theta } => {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(((1.0 + t) / 2.0).sqrt() * g1, ((1.0 - t) / 2.0).sqrt() * g2);
                Complex64::from_polar(1.0, theta) * z
            }
        }
    }
}

/// Model dimensions and deterministic profiles: `N × n` matrix with diagonal
/// variance profiles `D` (length `N`), `D̃` (length `n`), specular part `A`
/// and entry law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecDoc", into = "ModelSpecDoc")]
pub struct ModelSpec {
    d: Vec<f64>,
    dtilde: Vec<f64>,
    a: CMatrix,
    dist: EntryDistribution,
    a_max: f64,
    centered: bool,
}

impl ModelSpec {
    pub fn new(d: Vec<f64>, dtilde: Vec<f64>, a: CMatrix, dist: EntryDistribution) -> Result<Self> {
        let (nr, nc) = (d.len(), dtilde.len());
        if nr == 0 || nc == 0 {
            return Err(Error::Config("dimensions N and n must be positive".into()));
        }
        if a.nrows() != nr || a.ncols() != nc {
            return Err(Error::Config(format!(
                "A is {}x{} but the profiles imply {nr}x{nc}",
                a.nrows(),
                a.ncols()
            )));
        }
        if d.iter().chain(dtilde.iter()).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config("variance profiles must be finite and nonnegative".into()));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config("A has non-finite entries".into()));
        }
        let n = nc as f64;
        if d.iter().sum::<f64>() / n <= 0.0 || dtilde.iter().sum::<f64>() / n <= 0.0 {
            return Err(Error::Config("normalized traces of D and D̃ must be positive".into()));
        }
        let a_max = spectral_norm(&a);
        let centered = a.iter().all(|z| z.re == 0.0 && z.im == 0.0);
        Ok(Self {
            d,
            dtilde,
            a,
            dist,
            a_max,
            centered,
        })
    }

    /// `D = I_N`, `D̃ = I_n`.
    pub fn identity_profiles(a: CMatrix, dist: EntryDistribution) -> Result<Self> {
        let (nr, nc) = (a.nrows(), a.ncols());
        Self::new(vec![1.0; nr], vec![1.0; nc], a, dist)
    }

    /// `N` (receive dimension, rows).
    pub fn n_rows(&self) -> usize {
        self.d.len()
    }

    /// `n` (transmit dimension, columns).
    pub fn n_cols(&self) -> usize {
        self.dtilde.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn dtilde(&self) -> &[f64] {
        &self.dtilde
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn dist(&self) -> &EntryDistribution {
        &self.dist
    }

    pub fn with_dist(&self, dist: EntryDistribution) -> Self {
        Self { dist, ..self.clone() }
    }

    /// Whether `A = 0`.
    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Spectral norm of `A`.
    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn d_max(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }

    pub fn dtilde_max(&self) -> f64 {
        self.dtilde.iter().cloned().fold(0.0, f64::max)
    }

    /// `n^{-1} Tr D` (normalized by `n`, not `N`).
    pub fn d_min(&self) -> f64 {
        self.d.iter().sum::<f64>() / self.n_cols() as f64
    }

    /// `n^{-1} Tr D̃`.
    pub fn dtilde_min(&self) -> f64 {
        self.dtilde.iter().sum::<f64>() / self.n_cols() as f64
    }

    /// `N / n`.
    pub fn ratio(&self) -> f64 {
        self.n_rows() as f64 / self.n_cols() as f64
    }
}

/// On-disk layout of a [`ModelSpec`]; matrices are row-major.
#[derive(Serialize, Deserialize)]
struct ModelSpecDoc {
    #[serde(rename = "N")]
    n_rows: usize,
    n: usize,
    d: Vec<f64>,
    dtilde: Vec<f64>,
    #[serde(rename = "A_re")]
    a_re: Vec<f64>,
    #[serde(rename = "A_im")]
    a_im: Vec<f64>,
    dist: EntryDistribution,
}

impl TryFrom<ModelSpecDoc> for ModelSpec {
    type Error = Error;

    fn try_from(doc: ModelSpecDoc) -> Result<Self> {
        let (nr, nc) = (doc.n_rows, doc.n);
        if doc.d.len() != nr || doc.dtilde.len() != nc {
            return Err(Error::Config(format!(
                "profile lengths ({}, {}) do not match (N, n) = ({nr}, {nc})",
                doc.d.len(),
                doc.dtilde.len()
            )));
        }
        if doc.a_re.len() != nr * nc || doc.a_im.len() != nr * nc {
            return Err(Error::Config(format!(
                "A_re and A_im must hold N*n = {} entries",
                nr * nc
            )));
        }
        let a = CMatrix::from_fn(nr, nc, |i, j| {
            Complex64::new(doc.a_re[i * nc + j], doc.a_im[i * nc + j])
        });
        ModelSpec::new(doc.d, doc.dtilde, a, doc.dist)
    }
}

impl From<ModelSpec> for ModelSpecDoc {
    fn from(s: ModelSpec) -> Self {
        let (nr, nc) = (s.n_rows(), s.n_cols());
        let mut a_re = Vec::with_capacity(nr * nc);
        let mut a_im = Vec::with_capacity(nr * nc);
        for i in 0..nr {
            for j in 0..nc {
                a_re.push(s.a[(i, j)].re);
                a_im.push(s.a[(i, j)].im);
            }
        }
        Self {
            n_rows: nr,
            n: nc,
            d: s.d,
            dtilde: s.dtilde,
            a_re,
            a_im,
            dist: s.dist,
        }
    }
}

/// Presets for the specular component `A`.
pub mod specular {
    use super::*;

    pub fn zero(n_rows: usize, n_cols: usize) -> CMatrix {
        CMatrix::zeros(n_rows, n_cols)
    }

    /// `norm · u v^*` for unit vectors `u`, `v` (normalized here).
    pub fn rank_one_from(u: &[Complex64], v: &[Complex64], norm: f64) -> CMatrix {
        let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj() * (norm / (nu * nv)))
    }

    /// Real rank-one matrix built from the normalized all-ones vectors.
    pub fn rank_one(n_rows: usize, n_cols: usize, norm: f64) -> CMatrix {
        let one = Complex64::new(1.0, 0.0);
        rank_one_from(&vec![one; n_rows], &vec![one; n_cols], norm)
    }

    /// Complex rank-one matrix with deterministic, non-trivial phases.
    pub fn rank_one_phased(n_rows: usize, n_cols: usize, norm: f64) -> CMatrix {
        let u: Vec<_> = (0..n_rows)
            .map(|i| Complex64::from_polar(1.0, 0.7 * i as f64))
            .collect();
        let v: Vec<_> = (0..n_cols)
            .map(|j| Complex64::from_polar(1.0, -0.3 * j as f64 + 0.1))
            .collect();
        rank_one_from(&u, &v, norm)
    }

    /// Dense pseudo-random matrix rescaled to spectral norm `norm`.
    pub fn pseudo_random(n_rows: usize, n_cols: usize, norm: f64, seed: u64) -> CMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g = EntryDistribution::complex_gaussian();
        let m = CMatrix::from_fn(n_rows, n_cols, |_, _| g.sample(&mut rng));
        let s = spectral_norm(&m);
        if s == 0.0 {
            m
        } else {
            m * Complex64::new(norm / s, 0.0)
        }
    }
}

/// Independent random stream for replicate `replicate_index` of an experiment
/// seeded with `seed`: the ChaCha20 key is derived from `seed` and the
/// replicate index selects the stream.
pub fn replicate_rng(seed: u64, replicate_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate_index);
    rng
}

/// One draw of `Σ` together with the coordinates that reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrix {
    pub sigma: CMatrix,
    pub seed: u64,
    pub replicate_index: u64,
}

/// Draws the centered part `n^{-1/2} D^{1/2} X D̃^{1/2}`, entries in
/// row-major order from `rng`.
pub fn sample_noise<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> CMatrix {
    let (nr, nc) = (spec.n_rows(), spec.n_cols());
    let scale = 1.0 / (nc as f64).sqrt();
    let sd: Vec<f64> = spec.d.iter().map(|x| x.sqrt()).collect();
    let sdt: Vec<f64> = spec.dtilde.iter().map(|x| x.sqrt()).collect();
    let mut y = CMatrix::zeros(nr, nc);
    for i in 0..nr {
        for j in 0..nc {
            y[(i, j)] = spec.dist.sample(rng) * (scale * sd[i] * sdt[j]);
        }
    }
    y
}

/// `Σ = n^{-1/2} D^{1/2} X D̃^{1/2} + A`, a pure function of
/// `(spec, seed, replicate_index)`.
pub fn sample_sigma(spec: &ModelSpec, seed: u64, replicate_index: u64) -> SampledMatrix {
    let mut rng = replicate_rng(seed, replicate_index);
    let sigma = sample_noise(spec, &mut rng) + &spec.a;
    SampledMatrix {
        sigma,
        seed,
        replicate_index,
    }
}

/// Empirical moment of one statistic with its standard error and the z-score
/// against the declared value. Complex statistics use the larger of the real
/// and imaginary z-scores.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentEstimate {
    pub empirical: Complex64,
    pub declared: Complex64,
    pub std_error: Complex64,
    pub z_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub n_samples: usize,
    /// `E X`
    pub mean: MomentEstimate,
    /// `E|X|²`
    pub second_abs: MomentEstimate,
    /// `E X²`
    pub pseudo_variance: MomentEstimate,
    /// `E|X|⁴`
    pub fourth_abs: MomentEstimate,
    /// `E|X|²X`
    pub third_mixed: MomentEstimate,
    /// `Ê|X|⁴ - 2 - |Ê X²|²`
    pub kappa_hat: f64,
}

impl MomentCheck {
    pub fn max_abs_z(&self) -> f64 {
        [
            self.mean.z_score,
            self.second_abs.z_score,
            self.pseudo_variance.z_score,
            self.fourth_abs.z_score,
            self.third_mixed.z_score,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
    }
}

/// z-score with a zero-variance convention: an exact match scores 0.
pub(crate) fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

#[derive(Default)]
struct ComplexAccumulator {
    n: usize,
    sum: Complex64,
    sum_sq_re: f64,
    sum_sq_im: f64,
}

impl ComplexAccumulator {
    fn push(&mut self, z: Complex64) {
        self.n += 1;
        self.sum += z;
        self.sum_sq_re += z.re * z.re;
        self.sum_sq_im += z.im * z.im;
    }

    fn estimate(&self, declared: Complex64) -> MomentEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var_re = ((self.sum_sq_re - n * mean.re * mean.re) / (n - 1.0)).max(0.0);
        let var_im = ((self.sum_sq_im - n * mean.im * mean.im) / (n - 1.0)).max(0.0);
        let se = Complex64::new((var_re / n).sqrt(), (var_im / n).sqrt());
        let z_re = z_score(mean.re - declared.re, se.re);
        let z_im = z_score(mean.im - declared.im, se.im);
        let z = if z_re.abs() >= z_im.abs() { z_re } else { z_im };
        MomentEstimate {
            empirical: mean,
            declared,
            std_error: se,
            z_score: z,
        }
    }
}

/// Compares empirical moments of `n_samples` draws against the declared ones.
pub fn empirical_moment_check(dist: &EntryDistribution, n_samples: usize, seed: u64) -> Result<MomentCheck> {
    if n_samples < 10_000 {
        return Err(Error::InsufficientSamples {
            needed: 10_000,
            got: n_samples,
        });
    }
    let mut rng = replicate_rng(seed, 0);
    let mut acc: [ComplexAccumulator; 5] = Default::default();
    for _ in 0..n_samples {
        let x = dist.sample(&mut rng);
        let a2 = x.norm_sqr();
        acc[0].push(x);
        acc[1].push(Complex64::new(a2, 0.0));
        acc[2].push(x * x);
        acc[3].push(Complex64::new(a2 * a2, 0.0));
        acc[4].push(x * a2);
    }
    let real = |v: f64| Complex64::new(v, 0.0);
    let mean = acc[0].estimate(real(0.0));
    let second_abs = acc[1].estimate(real(1.0));
    let pseudo_variance = acc[2].estimate(dist.vartheta());
    let fourth_abs = acc[3].estimate(real(dist.fourth_abs_moment()));
    let third_mixed = acc[4].estimate(dist.varsigma());
    let kappa_hat = fourth_abs.empirical.re - 2.0 - pseudo_variance.empirical.norm_sqr();
    Ok(MomentCheck {
        n_samples,
        mean,
        second_abs,
        pseudo_variance,
        fourth_abs,
        third_mixed,
        kappa_hat,
    })
}
