//! Dense complex linear-algebra helpers built on `nalgebra`.
//!
//! Hermitian positive definite matrices are factored with Cholesky for log
//! determinants, traces of inverses and explicit inverses. Products go
//! through the real representation so the heavy lifting lands in the
//! optimized `f64` GEMM kernels.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

fn split(m: &CMatrix) -> (RMatrix, RMatrix) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join(re: &RMatrix, im: &RMatrix) -> CMatrix {
    re.zip_map(im, Complex64::new)
}

/// Complex product `a * b`.
pub fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "dimension mismatch in cmul");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

/// Complex product `a * b^*`.
pub fn cmul_adj(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols(), "dimension mismatch in cmul_adj");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * br.transpose() + &ai * bi.transpose();
    let im = &ai * br.transpose() - &ar * bi.transpose();
    join(&re, &im)
}

/// Complex product `a^* * b`.
pub fn adj_cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows(), "dimension mismatch in adj_cmul");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = ar.tr_mul(&br) + ai.tr_mul(&bi);
    let im = ar.tr_mul(&bi) - ai.tr_mul(&br);
    join(&re, &im)
}

/// Gram matrix `sigma * sigma^*`, exactly Hermitian.
pub fn gram(sigma: &CMatrix) -> CMatrix {
    let mut g = cmul_adj(sigma, sigma);
    hermitize(&mut g);
    g
}

/// Replaces `m` by `(m + m^*)/2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in 0..i {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Cholesky factorization of a Hermitian positive definite matrix.
pub fn cholesky(m: &CMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let not_pd = || Error::Numerical("matrix is not Hermitian positive definite".into());
    let chol = Cholesky::new(m.clone()).ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    let pivots_ok = (0..m.nrows()).all(|i| {
        let p = l[(i, i)];
        p.re > 0.0 && p.re.is_finite() && p.im.abs() <= 1e-12 * p.re
    });
    if !pivots_ok {
        return Err(not_pd());
    }
    Ok(chol)
}

/// `log det m` for Hermitian positive definite `m`, as twice the sum of the
/// logarithms of the Cholesky diagonal.
pub fn log_det_hpd(m: &CMatrix) -> Result<f64> {
    let chol = cholesky(m)?;
    let l = chol.l_dirty();
    Ok(2.0 * (0..m.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_hpd(m: &CMatrix) -> Result<CMatrix> {
    let mut inv = cholesky(m)?.inverse();
    hermitize(&mut inv);
    Ok(inv)
}

/// `Tr m^{-1}` for Hermitian positive definite `m`, computed as the squared
/// Frobenius norm of `L^{-1}`.
pub fn trace_inverse_hpd(m: &CMatrix) -> Result<f64> {
    let chol = cholesky(m)?;
    let n = m.nrows();
    let mut linv = CMatrix::identity(n, n);
    if !chol.l().solve_lower_triangular_mut(&mut linv) {
        return Err(Error::Numerical("singular Cholesky factor".into()));
    }
    Ok(linv.iter().map(|z| z.norm_sqr()).sum())
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `max |m_ij - m_ji^*|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(nr: usize, nc: usize, salt: f64) -> CMatrix {
        CMatrix::from_fn(nr, nc, |i, j| {
            let t = (i * 7 + j * 3) as f64 + salt;
            Complex64::new(t.sin(), (1.3 * t).cos())
        })
    }

    #[test]
    fn real_representation_products_match_nalgebra() {
        let a = sample(5, 3, 0.1);
        let b = sample(3, 4, 0.7);
        let c = sample(4, 3, 1.9);
        assert!((cmul(&a, &b) - &a * &b).norm() < 1e-12);
        assert!((cmul_adj(&a, &c) - &a * c.adjoint()).norm() < 1e-12);
        assert!((adj_cmul(&b, &sample(3, 2, 2.2)) - b.adjoint() * sample(3, 2, 2.2)).norm() < 1e-12);
    }

    #[test]
    fn log_det_matches_eigenvalues() {
        let s = sample(6, 9, 0.3);
        let mut g = gram(&s);
        for i in 0..6 {
            g[(i, i)] += Complex64::new(0.5, 0.0);
        }
        let ld = log_det_hpd(&g).unwrap();
        let ev: f64 = hermitian_eigenvalues(&g).iter().map(|l| l.ln()).sum();
        assert!((ld - ev).abs() < 1e-10);
        let tr: f64 = hermitian_eigenvalues(&g).iter().map(|l| 1.0 / l).sum();
        assert!((trace_inverse_hpd(&g).unwrap() - tr).abs() < 1e-10);
        let inv = inverse_hpd(&g).unwrap();
        assert!((cmul(&inv, &g) - CMatrix::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn non_pd_and_non_finite_are_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(matches!(log_det_hpd(&m), Err(Error::Numerical(_))));
        m[(1, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(log_det_hpd(&m), Err(Error::Input(_))));
    }
}
