//! Fixed-point solution `(δ, δ̃)` of the fundamental system at `z = -ρ` and
//! the deterministic equivalents `T`, `T̃` of the resolvent and co-resolvent.
//!
//! At `z = -ρ` the system reads
//!
//! ```text
//! δ  = n^{-1} Tr D  (ρ(I_N + δ̃ D) + A (I_n + δ D̃)^{-1} A^*)^{-1}
//! δ̃ = n^{-1} Tr D̃ (ρ(I_n + δ D̃) + A^* (I_N + δ̃ D)^{-1} A)^{-1}
//! ```
//!
//! and is solved by Gauss–Seidel fixed-point iteration started from the total
//! masses `n^{-1} Tr D / ρ`, `n^{-1} Tr D̃ / ρ`. When the update size keeps
//! growing the iteration switches to a damped update.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adj_cmul, cholesky, cmul, cmul_adj, hermitize, inverse_hpd, CMatrix};
use crate::model::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop once `max(|Δδ|, |Δδ̃|) <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation factor used once damping is triggered.
    pub damping: f64,
    /// Number of non-monotone residual steps that triggers damping.
    pub damping_trigger: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
            damping: 0.5,
            damping_trigger: 100,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Converged `(δ, δ̃)` at `z = -ρ` with the matrices `T` (`N × N`) and `T̃`
/// (`n × n`).
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub rho: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub t: CMatrix,
    pub t_tilde: CMatrix,
    pub iterations: usize,
    /// Size of the last fixed-point update.
    pub residual: f64,
}

/// JSON form of a solution; the matrices are dumped separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub rho: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl EquilibriumSolution {
    pub fn summary(&self) -> EquilibriumSummary {
        EquilibriumSummary {
            rho: self.rho,
            delta: self.delta,
            delta_tilde: self.delta_tilde,
            iterations: self.iterations,
            residual: self.residual,
        }
    }

    /// Residuals `(|δ - n^{-1} Tr DT|, |δ̃ - n^{-1} Tr D̃T̃|)` of both
    /// equations at the returned pair.
    pub fn fixed_point_residuals(&self, spec: &ModelSpec) -> (f64, f64) {
        let n = spec.n_cols() as f64;
        let tr_dt: f64 = spec.d().iter().enumerate().map(|(i, d)| d * self.t[(i, i)].re).sum();
        let tr_dtt: f64 = spec
            .dtilde()
            .iter()
            .enumerate()
            .map(|(j, d)| d * self.t_tilde[(j, j)].re)
            .sum();
        ((self.delta - tr_dt / n).abs(), (self.delta_tilde - tr_dtt / n).abs())
    }
}

/// Writes `m` as row-major little-endian `f64` pairs `(re, im)`.
pub fn write_matrix_binary<W: Write>(mut w: W, m: &CMatrix) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].re.to_le_bytes())?;
            w.write_all(&m[(i, j)].im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn real_diag(v: impl Iterator<Item = f64>) -> DVector<Complex64> {
    DVector::from_vec(v.map(|x| Complex64::new(x, 0.0)).collect())
}

/// `ρ(I_N + δ̃ D) + A (I_n + δ D̃)^{-1} A^*`, the inverse of `T`.
fn t_inverse(spec: &ModelSpec, rho: f64, delta: f64, delta_tilde: f64) -> CMatrix {
    let mut k = if spec.is_centered() {
        CMatrix::zeros(spec.n_rows(), spec.n_rows())
    } else {
        let w = real_diag(spec.dtilde().iter().map(|dt| 1.0 / (1.0 + delta * dt)));
        let aw = spec.a() * CMatrix::from_diagonal(&w);
        let mut k = cmul_adj(&aw, spec.a());
        hermitize(&mut k);
        k
    };
    for (i, d) in spec.d().iter().enumerate() {
        k[(i, i)] += rho * (1.0 + delta_tilde * d);
    }
    k
}

/// `ρ(I_n + δ D̃) + A^* (I_N + δ̃ D)^{-1} A`, the inverse of `T̃`.
fn t_tilde_inverse(spec: &ModelSpec, rho: f64, delta: f64, delta_tilde: f64) -> CMatrix {
    let mut k = if spec.is_centered() {
        CMatrix::zeros(spec.n_cols(), spec.n_cols())
    } else {
        let w = real_diag(spec.d().iter().map(|d| 1.0 / (1.0 + delta_tilde * d)));
        let wa = CMatrix::from_diagonal(&w) * spec.a();
        let mut k = adj_cmul(spec.a(), &wa);
        hermitize(&mut k);
        k
    };
    for (j, dt) in spec.dtilde().iter().enumerate() {
        k[(j, j)] += rho * (1.0 + delta * dt);
    }
    k
}

/// `Σ_i w_i [K^{-1}]_ii` for Hermitian positive definite `K`.
fn weighted_inverse_trace(k: &CMatrix, weights: &[f64]) -> Result<f64> {
    let chol = cholesky(k)?;
    let n = k.nrows();
    let mut linv = CMatrix::identity(n, n);
    if !chol.l().solve_lower_triangular_mut(&mut linv) {
        return Err(Error::Numerical("singular Cholesky factor".into()));
    }
    // [K^{-1}]_ii = Σ_k |L^{-1}_{ki}|²
    Ok(weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(i, w)| w * linv.column(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum())
}

/// Right-hand side of the first equation, `n^{-1} Tr D T(δ, δ̃)`.
fn update_delta(spec: &ModelSpec, rho: f64, delta: f64, delta_tilde: f64) -> Result<f64> {
    let n = spec.n_cols() as f64;
    if spec.is_centered() {
        return Ok(spec
            .d()
            .iter()
            .map(|d| d / (rho * (1.0 + delta_tilde * d)))
            .sum::<f64>()
            / n);
    }
    Ok(weighted_inverse_trace(&t_inverse(spec, rho, delta, delta_tilde), spec.d())? / n)
}

/// Right-hand side of the second equation, `n^{-1} Tr D̃ T̃(δ, δ̃)`.
fn update_delta_tilde(spec: &ModelSpec, rho: f64, delta: f64, delta_tilde: f64) -> Result<f64> {
    let n = spec.n_cols() as f64;
    if spec.is_centered() {
        return Ok(spec.dtilde().iter().map(|d| d / (rho * (1.0 + delta * d))).sum::<f64>() / n);
    }
    Ok(weighted_inverse_trace(&t_tilde_inverse(spec, rho, delta, delta_tilde), spec.dtilde())? / n)
}

/// Solves the fundamental system at `z = -ρ` from the default start.
pub fn solve_fundamental(spec: &ModelSpec, rho: f64, opts: &SolverOptions) -> Result<EquilibriumSolution> {
    let init = (spec.d_min() / rho, spec.dtilde_min() / rho);
    solve_from(spec, rho, opts, init)
}

/// Solves the fundamental system at `z = -ρ` starting from `init = (δ₀, δ̃₀)`.
pub fn solve_from(spec: &ModelSpec, rho: f64, opts: &SolverOptions, init: (f64, f64)) -> Result<EquilibriumSolution> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Config(format!("rho must be positive and finite, got {rho}")));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 || !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Config(format!("invalid solver options {opts:?}")));
    }
    let (mut delta, mut delta_tilde) = init;
    if !(delta > 0.0 && delta_tilde > 0.0) {
        return Err(Error::Config("initial point must be positive".into()));
    }
    let mut relax = 1.0;
    let mut previous = f64::INFINITY;
    let mut non_monotone = 0;
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let new_delta = delta + relax * (update_delta(spec, rho, delta, delta_tilde)? - delta);
        let new_delta_tilde =
            delta_tilde + relax * (update_delta_tilde(spec, rho, new_delta, delta_tilde)? - delta_tilde);
        residual = (new_delta - delta).abs().max((new_delta_tilde - delta_tilde).abs());
        delta = new_delta;
        delta_tilde = new_delta_tilde;
        if !residual.is_finite() {
            return Err(Error::Numerical(format!(
                "fixed-point iterate became non-finite at iteration {iter}"
            )));
        }
        if residual <= opts.tol {
            let (t, t_tilde) = build_t(spec, rho, delta, delta_tilde)?;
            return Ok(EquilibriumSolution {
                rho,
                delta,
                delta_tilde,
                t,
                t_tilde,
                iterations: iter,
                residual,
            });
        }
        if residual > previous {
            non_monotone += 1;
            if non_monotone >= opts.damping_trigger {
                relax = opts.damping;
            }
        }
        previous = residual;
    }
    Err(Error::IterationLimit {
        iterations: opts.max_iter,
        residual,
    })
}

/// `T = (ρ(I + δ̃D) + A(I + δD̃)^{-1}A^*)^{-1}` and
/// `T̃ = (ρ(I + δD̃) + A^*(I + δ̃D)^{-1}A)^{-1}`.
pub fn build_t(spec: &ModelSpec, rho: f64, delta: f64, delta_tilde: f64) -> Result<(CMatrix, CMatrix)> {
    if !(delta > 0.0 && delta_tilde > 0.0) {
        return Err(Error::Input("delta and delta_tilde must be positive".into()));
    }
    if spec.is_centered() {
        let t = CMatrix::from_diagonal(&real_diag(
            spec.d().iter().map(|d| 1.0 / (rho * (1.0 + delta_tilde * d))),
        ));
        let tt = CMatrix::from_diagonal(&real_diag(
            spec.dtilde().iter().map(|d| 1.0 / (rho * (1.0 + delta * d))),
        ));
        return Ok((t, tt));
    }
    let t = inverse_hpd(&t_inverse(spec, rho, delta, delta_tilde))?;
    let tt = inverse_hpd(&t_tilde_inverse(spec, rho, delta, delta_tilde))?;
    Ok((t, tt))
}

/// The inverse of `T` at the solution, exposed for log-determinant evaluation.
pub fn t_inverse_at(spec: &ModelSpec, sol: &EquilibriumSolution) -> CMatrix {
    t_inverse(spec, sol.rho, sol.delta, sol.delta_tilde)
}

/// Frobenius norm of `T̃ - [ρ^{-1}(I + δD̃)^{-1} - ρ^{-1}(I + δD̃)^{-1} A^* T A (I + δD̃)^{-1}]`.
pub fn ttilde_consistency_residual(spec: &ModelSpec, sol: &EquilibriumSolution) -> f64 {
    let rho = sol.rho;
    let e: Vec<f64> = spec.dtilde().iter().map(|d| 1.0 / (1.0 + sol.delta * d)).collect();
    let nc = spec.n_cols();
    let mut rhs = if spec.is_centered() {
        CMatrix::zeros(nc, nc)
    } else {
        let ata = adj_cmul(spec.a(), &cmul(&sol.t, spec.a()));
        CMatrix::from_fn(nc, nc, |k, l| -ata[(k, l)] * (e[k] * e[l] / rho))
    };
    for (k, ek) in e.iter().enumerate() {
        rhs[(k, k)] += ek / rho;
    }
    (&sol.t_tilde - rhs).norm()
}

/// `max_j |T̃_jj - [ρ(1 + a_j^* 𝒯_j a_j + d̃_j δ)]^{-1}|`, where
/// `𝒯_j = (ρ(I + δ̃D) + A_j(I + δD̃_j)^{-1}A_j^*)^{-1}` is built with column
/// `j` of `A` removed.
pub fn ttilde_diag_identity_residual(spec: &ModelSpec, sol: &EquilibriumSolution) -> Result<f64> {
    let rho = sol.rho;
    let mut worst: f64 = 0.0;
    let base: Vec<f64> = spec.d().iter().map(|d| rho * (1.0 + sol.delta_tilde * d)).collect();
    let (nr, nc) = (spec.n_rows(), spec.n_cols());
    for j in 0..nc {
        let quad = if spec.is_centered() {
            0.0
        } else {
            let keep: Vec<usize> = (0..nc).filter(|&k| k != j).collect();
            let aj = spec.a().select_columns(&keep);
            let w = real_diag(keep.iter().map(|&k| 1.0 / (1.0 + sol.delta * spec.dtilde()[k])));
            let mut k = cmul_adj(&(&aj * CMatrix::from_diagonal(&w)), &aj);
            for (i, b) in base.iter().enumerate() {
                k[(i, i)] += *b;
            }
            hermitize(&mut k);
            let col = spec.a().column(j).into_owned();
            let x = cholesky(&k)?.solve(&col);
            debug_assert_eq!(x.nrows(), nr);
            col.iter()
                .zip(x.iter())
                .map(|(a, y)| a.conj() * y)
                .sum::<Complex64>()
                .re
        };
        let expected = 1.0 / (rho * (1.0 + quad + spec.dtilde()[j] * sol.delta));
        worst = worst.max((sol.t_tilde[(j, j)] - Complex64::new(expected, 0.0)).norm());
    }
    Ok(worst)
}

/// Solves along a strictly increasing grid of `ρ` values, warm-starting each
/// point from the previous solution.
pub fn solve_on_grid(spec: &ModelSpec, rho_grid: &[f64], opts: &SolverOptions) -> Result<Vec<EquilibriumSolution>> {
    if rho_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("rho grid must be strictly increasing".into()));
    }
    let mut out: Vec<EquilibriumSolution> = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let res = match out.last() {
            Some(prev) => solve_from(spec, rho, opts, (prev.delta, prev.delta_tilde)),
            None => solve_fundamental(spec, rho, opts),
        };
        out.push(res.map_err(|e| Error::GridPoint {
            rho,
            source: Box::new(e),
        })?);
    }
    Ok(out)
}
