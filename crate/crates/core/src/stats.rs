//! Normality verdicts on Monte Carlo output.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::deterministic::FluctuationReport;
use crate::error::{Error, Result};
use crate::montecarlo::{mean_variance, MCResult};

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

/// `Φ^{-1}(p)`.
pub fn normal_quantile(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

/// Asymptotic Kolmogorov critical value `c(α)`.
pub fn ks_critical_value(alpha: f64) -> Result<f64> {
    const TABLE: [(f64, f64); 3] = [(0.10, 1.224), (0.05, 1.358), (0.01, 1.628)];
    TABLE
        .iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-12)
        .map(|(_, c)| *c)
        .ok_or_else(|| Error::Config(format!("alpha must be one of 0.10, 0.05, 0.01, got {alpha}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// One-sample Kolmogorov–Smirnov test against `𝒩(0, 1)`.
pub fn ks_test_standard_normal(samples: &[f64], alpha: f64) -> Result<KsOutcome> {
    let c = ks_critical_value(alpha)?;
    let r = samples.len();
    if r < 50 {
        return Err(Error::InsufficientSamples { needed: 50, got: r });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("samples must be finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rf = r as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal_cdf(*x);
            (f - i as f64 / rf).max((i + 1) as f64 / rf - f)
        })
        .fold(0.0, f64::max);
    let threshold = c / rf.sqrt();
    Ok(KsOutcome {
        statistic,
        threshold,
        pass: statistic < threshold,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// NaN when the variance is zero.
    pub skewness: f64,
    pub skewness_se: f64,
    /// NaN when the variance is zero.
    pub excess_kurtosis: f64,
    pub excess_kurtosis_se: f64,
}

impl MomentReport {
    pub fn shape_undefined(&self) -> bool {
        self.skewness.is_nan()
    }
}

pub fn moment_report(samples: &[f64]) -> Result<MomentReport> {
    let r = samples.len();
    if r < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: r });
    }
    let rf = r as f64;
    let (mean, variance) = mean_variance(samples);
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rf;
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / rf;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / rf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(MomentReport {
        n: r,
        mean,
        mean_se: (variance / rf).sqrt(),
        variance,
        skewness,
        skewness_se: (6.0 / rf).sqrt(),
        excess_kurtosis,
        excess_kurtosis_se: (24.0 / rf).sqrt(),
    })
}

/// `(Φ^{-1}((i - 0.5)/R), x_(i))` for the sorted samples.
pub fn qq_points(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    let r = samples.len();
    if r < 10 {
        return Err(Error::InsufficientSamples { needed: 10, got: r });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, y)| (normal_quantile((i as f64 + 0.5) / r as f64), y))
        .collect())
}

pub fn qq_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("theoretical,empirical\n");
    for (x, y) in points {
        out.push_str(&format!("{x:.17e},{y:.17e}\n"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityVerdict {
    pub ks_statistic: f64,
    pub ks_threshold: f64,
    pub alpha: f64,
    pub sample_skewness: f64,
    pub sample_excess_kurtosis: f64,
    /// `var(N·I_n)/Θ`.
    pub variance_ratio: f64,
    pub var_tol: f64,
    pub ks_pass: bool,
    pub variance_pass: bool,
    pub pass: bool,
}

/// KS test on the mean-centered standardized replicates combined with
/// `|var(N·I_n)/Θ - 1| < var_tol`.
pub fn clt_verdict(mc: &MCResult, report: &FluctuationReport, alpha: f64, var_tol: f64) -> Result<NormalityVerdict> {
    if !(var_tol > 0.0) {
        return Err(Error::Config(format!("var_tol must be positive, got {var_tol}")));
    }
    let ks = ks_test_standard_normal(&mc.standardized, alpha)?;
    let moments = moment_report(&mc.standardized)?;
    let variance_ratio = mc.scaled_variance() / report.theta;
    let variance_pass = (variance_ratio - 1.0).abs() < var_tol;
    Ok(NormalityVerdict {
        ks_statistic: ks.statistic,
        ks_threshold: ks.threshold,
        alpha,
        sample_skewness: moments.skewness,
        sample_excess_kurtosis: moments.excess_kurtosis,
        variance_ratio,
        var_tol,
        ks_pass: ks.pass,
        variance_pass,
        pass: ks.pass && variance_pass,
    })
}
