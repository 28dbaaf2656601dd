//! Closed-form deterministic quantities evaluated at a converged equilibrium:
//! the mutual-information equivalent `V`, the γ-family, the determinants
//! `Δ`, `Δ̲`, the CLT variance `Θ`, the centered-case bias `B`, the
//! `F/M/G` decomposition of `Δ` and the bound suite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{t_inverse_at, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::linalg::{adj_cmul, cmul, log_det_hpd, CMatrix};
use crate::model::{EntryDistribution, ModelSpec};

/// `γ = n^{-1} Tr DTDT`, `γ̃ = n^{-1} Tr D̃T̃D̃T̃` and their conjugated
/// counterparts `γ̲ = n^{-1} Tr DTDT̄`, `γ̲̃ = n^{-1} Tr D̃T̃D̃T̃̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gammas {
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub gamma_under: Complex64,
    pub gamma_tilde_under: Complex64,
}

fn gamma_pair(diag: &[f64], t: &CMatrix, n: f64) -> (f64, Complex64) {
    let mut plain = 0.0;
    let mut conj = Complex64::new(0.0, 0.0);
    for (i, di) in diag.iter().enumerate() {
        if *di == 0.0 {
            continue;
        }
        for (j, dj) in diag.iter().enumerate() {
            // T Hermitian: [T]_ji = conj([T]_ij), [T̄]_ji = [T]_ij
            let tij = t[(i, j)];
            plain += di * dj * tij.norm_sqr();
            conj += tij * tij * (di * dj);
        }
    }
    (plain / n, conj / n)
}

pub fn gammas(spec: &ModelSpec, sol: &EquilibriumSolution) -> Gammas {
    let n = spec.n_cols() as f64;
    let (gamma, gamma_under) = gamma_pair(spec.d(), &sol.t, n);
    let (gamma_tilde, gamma_tilde_under) = gamma_pair(spec.dtilde(), &sol.t_tilde, n);
    Gammas {
        gamma,
        gamma_tilde,
        gamma_under,
        gamma_tilde_under,
    }
}

/// `V = N^{-1} log det(ρ(I + δ̃D) + A(I + δD̃)^{-1}A^*) + N^{-1} log det(I + δD̃) - (ρn/N) δ δ̃`.
pub fn mutual_info_equivalent(spec: &ModelSpec, sol: &EquilibriumSolution) -> Result<f64> {
    let nr = spec.n_rows() as f64;
    let nc = spec.n_cols() as f64;
    let first = if spec.is_centered() {
        spec.d()
            .iter()
            .map(|d| (sol.rho * (1.0 + sol.delta_tilde * d)).ln())
            .sum::<f64>()
    } else {
        log_det_hpd(&t_inverse_at(spec, sol))?
    };
    let second: f64 = spec.dtilde().iter().map(|d| (sol.delta * d).ln_1p()).sum();
    Ok(first / nr + second / nr - sol.rho * nc / nr * sol.delta * sol.delta_tilde)
}

/// Ingredients of the CLT variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerms {
    /// `F = n^{-1} Tr D^{1/2} T A (I + δD̃)^{-2} D̃ A^* T D^{1/2}`.
    pub f: f64,
    /// `F̲ = n^{-1} Tr D^{1/2} T̄ Ā (I + δD̃)^{-2} D̃ A^* T D^{1/2}`.
    pub f_under: Complex64,
    /// `Δ = (1 - F)² - ρ²γγ̃`.
    pub delta: f64,
    /// `Δ̲ = |1 - ϑF̲|² - |ϑ|²ρ²γ̲γ̲̃`.
    pub delta_under: f64,
    /// `κ ρ²/n² Σ_i d_i² t_ii² Σ_j d̃_j² t̃_jj²`.
    pub cumulant_term: f64,
    /// `Θ = -log Δ - log Δ̲ + cumulant_term`.
    pub theta: f64,
}

/// `(F, F̲)`.
fn f_terms(spec: &ModelSpec, sol: &EquilibriumSolution) -> (f64, Complex64) {
    if spec.is_centered() {
        return (0.0, Complex64::new(0.0, 0.0));
    }
    let n = spec.n_cols() as f64;
    let b = cmul(&sol.t, spec.a());
    let mut f = 0.0;
    let mut f_under = Complex64::new(0.0, 0.0);
    for (k, dt) in spec.dtilde().iter().enumerate() {
        let w = dt / (1.0 + sol.delta * dt).powi(2);
        if w == 0.0 {
            continue;
        }
        for (i, d) in spec.d().iter().enumerate() {
            let bik = b[(i, k)];
            f += w * d * bik.norm_sqr();
            f_under += bik.conj() * bik.conj() * (w * d);
        }
    }
    (f / n, f_under / n)
}

pub fn variance_theta(spec: &ModelSpec, sol: &EquilibriumSolution, dist: &EntryDistribution) -> Result<VarianceTerms> {
    let n = spec.n_cols() as f64;
    let rho2 = sol.rho * sol.rho;
    let g = gammas(spec, sol);
    let (f, f_under) = f_terms(spec, sol);
    let vartheta = dist.vartheta();

    let delta = (1.0 - f).powi(2) - rho2 * g.gamma * g.gamma_tilde;
    let delta_under = (Complex64::new(1.0, 0.0) - vartheta * f_under).norm_sqr()
        - vartheta.norm_sqr() * rho2 * (g.gamma_under * g.gamma_tilde_under).re;
    if !(delta > 0.0) {
        return Err(Error::Invariant(format!("Delta = {delta} is not positive")));
    }
    if !(delta_under > 0.0) {
        return Err(Error::Invariant(format!("Delta_under = {delta_under} is not positive")));
    }
    let sum_d: f64 = spec
        .d()
        .iter()
        .enumerate()
        .map(|(i, d)| (d * sol.t[(i, i)].re).powi(2))
        .sum();
    let sum_dt: f64 = spec
        .dtilde()
        .iter()
        .enumerate()
        .map(|(j, d)| (d * sol.t_tilde[(j, j)].re).powi(2))
        .sum();
    let cumulant_term = dist.kappa() * rho2 / (n * n) * sum_d * sum_dt;
    let theta = -delta.ln() - delta_under.ln() + cumulant_term;
    Ok(VarianceTerms {
        f,
        f_under,
        delta,
        delta_under,
        cumulant_term,
        theta,
    })
}

/// Bias `B = -(κ/2) ρ²γγ̃ + (1/2) log(1 - |ϑ|²ρ²γγ̃)`, defined for `A = 0`.
pub fn bias_centered(spec: &ModelSpec, sol: &EquilibriumSolution, dist: &EntryDistribution) -> Result<f64> {
    if !spec.is_centered() {
        return Err(Error::Unsupported("the bias formula requires A = 0".into()));
    }
    let g = gammas(spec, sol);
    let prod = sol.rho * sol.rho * g.gamma * g.gamma_tilde;
    Ok(-0.5 * dist.kappa() * prod + 0.5 * (-dist.vartheta().norm_sqr() * prod).ln_1p())
}

/// Column-by-column decomposition of `Δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmgDecomposition {
    pub f_n: f64,
    pub m_n: f64,
    pub g_n: f64,
    /// `(1 - F_n)² - γ(M_n + G_n)`.
    pub bold_delta_n: f64,
    /// `Δ_j` for `j = 1..=n`.
    pub partial: Vec<f64>,
}

/// Partial sums `F_j`, `M_j`, `G_j` over the first `j` columns and the
/// determinants `Δ_j = (1 - F_j)² - γ(M_j + G_j)`.
pub fn fmg_decomposition(spec: &ModelSpec, sol: &EquilibriumSolution) -> FmgDecomposition {
    let nc = spec.n_cols();
    let n = nc as f64;
    let rho2 = sol.rho * sol.rho;
    let gamma = gammas(spec, sol).gamma;
    let w: Vec<f64> = spec
        .dtilde()
        .iter()
        .map(|dt| dt / (1.0 + sol.delta * dt).powi(2))
        .collect();

    let (f_inc, c) = if spec.is_centered() {
        (vec![0.0; nc], None)
    } else {
        let b = cmul(&sol.t, spec.a());
        let f_inc: Vec<f64> = (0..nc)
            .map(|k| {
                w[k] * spec
                    .d()
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d * b[(i, k)].norm_sqr())
                    .sum::<f64>()
                    / n
            })
            .collect();
        (f_inc, Some(adj_cmul(spec.a(), &b)))
    };

    let mut partial = Vec::with_capacity(nc);
    let (mut f, mut m, mut g) = (0.0, 0.0, 0.0);
    for j in 0..nc {
        f += f_inc[j];
        m += rho2 * (sol.t_tilde[(j, j)].re * spec.dtilde()[j]).powi(2) / n;
        if let Some(c) = &c {
            // column j pairs with every earlier column, both orders
            let cross: f64 = (0..j).map(|l| w[j] * w[l] * c[(j, l)].norm_sqr()).sum();
            g += 2.0 * cross / n;
        }
        partial.push((1.0 - f).powi(2) - gamma * (m + g));
    }
    FmgDecomposition {
        f_n: f,
        m_n: m,
        g_n: g,
        bold_delta_n: *partial.last().unwrap_or(&1.0),
        partial,
    }
}

/// One inequality `lower <= value <= upper` with its slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    /// Smallest distance to either end; negative when violated.
    pub margin: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: &str, lower: f64, value: f64, upper: f64, strict_upper: bool) -> Self {
        let slack = 1e-12 * value.abs().max(1.0);
        let margin = (value - lower).min(upper - value);
        let upper_ok = if strict_upper {
            value < upper
        } else {
            value <= upper + slack
        };
        Self {
            name: name.to_string(),
            lower,
            value,
            upper,
            margin,
            pass: value >= lower - slack && upper_ok && value.is_finite(),
        }
    }
}

/// The brackets of the a priori estimates on `δ, δ̃, n^{-1}Tr DT²,
/// n^{-1}Tr D̃T̃², γ, γ̃, n^{-1}Σ d_i²t_ii², n^{-1}Σ d̃_j²t̃_jj²`, then `F < 1`
/// and `Δ >= (ρ/(nδ) Tr DT²)(ρ/(nδ̃) Tr D̃T̃²)`.
pub fn bounds_suite(spec: &ModelSpec, sol: &EquilibriumSolution) -> Vec<BoundCheck> {
    let n = spec.n_cols() as f64;
    let rho = sol.rho;
    let (d_max, dt_max) = (spec.d_max(), spec.dtilde_max());
    let (d_min, dt_min) = (spec.d_min(), spec.dtilde_min());
    let ell = spec.ratio();
    let a2 = spec.a_max().powi(2);
    let den = rho + d_max * dt_max + a2;
    let den_t = rho + ell * d_max * dt_max + a2;

    let g = gammas(spec, sol);
    let tr_dt2: f64 = spec
        .d()
        .iter()
        .enumerate()
        .map(|(i, d)| d * sol.t.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        / n;
    let tr_dtt2: f64 = spec
        .dtilde()
        .iter()
        .enumerate()
        .map(|(j, d)| d * sol.t_tilde.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        / n;
    let diag_d: f64 = spec
        .d()
        .iter()
        .enumerate()
        .map(|(i, d)| (d * sol.t[(i, i)].re).powi(2))
        .sum::<f64>()
        / n;
    let diag_dt: f64 = spec
        .dtilde()
        .iter()
        .enumerate()
        .map(|(j, d)| (d * sol.t_tilde[(j, j)].re).powi(2))
        .sum::<f64>()
        / n;
    let (f, _) = f_terms(spec, sol);
    let delta_n = (1.0 - f).powi(2) - rho * rho * g.gamma * g.gamma_tilde;
    let delta_floor = (rho / sol.delta * tr_dt2) * (rho / sol.delta_tilde * tr_dtt2);

    vec![
        BoundCheck::new("delta", d_min / den, sol.delta, ell * d_max / rho, false),
        BoundCheck::new("delta_tilde", dt_min / den_t, sol.delta_tilde, dt_max / rho, false),
        BoundCheck::new("tr_DT2", d_min / den.powi(2), tr_dt2, ell * d_max / rho.powi(2), false),
        BoundCheck::new("tr_DtTt2", dt_min / den_t.powi(2), tr_dtt2, dt_max / rho.powi(2), false),
        BoundCheck::new(
            "gamma",
            d_min.powi(2) / (ell * den.powi(2)),
            g.gamma,
            ell * d_max.powi(2) / rho.powi(2),
            false,
        ),
        BoundCheck::new(
            "gamma_tilde",
            dt_min.powi(2) / den_t.powi(2),
            g.gamma_tilde,
            dt_max.powi(2) / rho.powi(2),
            false,
        ),
        BoundCheck::new(
            "diag_DT",
            d_min.powi(2) / (ell * den.powi(2)),
            diag_d,
            ell * d_max.powi(2) / rho.powi(2),
            false,
        ),
        BoundCheck::new(
            "diag_DtTt",
            dt_min.powi(2) / den_t.powi(2),
            diag_dt,
            dt_max.powi(2) / rho.powi(2),
            false,
        ),
        BoundCheck::new("F_below_one", 0.0, f, 1.0, true),
        BoundCheck::new("Delta_floor", delta_floor, delta_n, 1.0, false),
    ]
}

/// Every deterministic quantity attached to one `(spec, ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub rho: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub gamma_under: Complex64,
    pub gamma_tilde_under: Complex64,
    pub f_under: Complex64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "Delta_under")]
    pub delta_under: f64,
    pub theta: f64,
    pub cumulant_term: f64,
    #[serde(rename = "F_n")]
    pub f_n: f64,
    #[serde(rename = "M_n")]
    pub m_n: f64,
    #[serde(rename = "G_n")]
    pub g_n: f64,
    pub bold_delta_n: f64,
    /// Only defined when `A = 0`.
    pub bias: Option<f64>,
    pub bounds: Vec<BoundCheck>,
    pub bounds_ok: bool,
}

impl FluctuationReport {
    pub const CSV_HEADER: &'static str = "rho,V,gamma,gamma_tilde,Delta,Delta_under,theta,bias";

    /// The circular-only variance `-log Δ + cumulant_term`, i.e. `Θ` without
    /// the `Δ̲` contribution.
    pub fn theta_without_pseudo_variance(&self) -> f64 {
        -self.delta.ln() + self.cumulant_term
    }

    pub fn csv_row(&self) -> String {
        let bias = self.bias.map(|b| format!("{b:.17e}")).unwrap_or_default();
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            self.rho, self.v, self.gamma, self.gamma_tilde, self.delta, self.delta_under, self.theta, bias
        )
    }
}

/// Builds the full report at a converged solution using the spec's entry law.
pub fn fluctuation_report(spec: &ModelSpec, sol: &EquilibriumSolution) -> Result<FluctuationReport> {
    let dist = spec.dist();
    let g = gammas(spec, sol);
    let var = variance_theta(spec, sol, dist)?;
    let fmg = fmg_decomposition(spec, sol);
    let bias = if spec.is_centered() {
        Some(bias_centered(spec, sol, dist)?)
    } else {
        None
    };
    let bounds = bounds_suite(spec, sol);
    let bounds_ok = bounds.iter().all(|b| b.pass);
    Ok(FluctuationReport {
        rho: sol.rho,
        v: mutual_info_equivalent(spec, sol)?,
        gamma: g.gamma,
        gamma_tilde: g.gamma_tilde,
        gamma_under: g.gamma_under,
        gamma_tilde_under: g.gamma_tilde_under,
        f_under: var.f_under,
        delta: var.delta,
        delta_under: var.delta_under,
        theta: var.theta,
        cumulant_term: var.cumulant_term,
        f_n: fmg.f_n,
        m_n: fmg.m_n,
        g_n: fmg.g_n,
        bold_delta_n: fmg.bold_delta_n,
        bias,
        bounds,
        bounds_ok,
    })
}
