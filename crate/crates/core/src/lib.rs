//! Deterministic equivalents and fluctuation theory for the mutual
//! information `N^{-1} log det(ΣΣ^* + ρI)` of non-centered random matrices
//! with a separable variance profile, together with Monte Carlo machinery
//! to check them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deterministic;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod stats;

pub use deterministic::{
    bias_centered, bounds_suite, fluctuation_report, fmg_decomposition, gammas, mutual_info_equivalent, variance_theta,
    BoundCheck, FluctuationReport, FmgDecomposition, Gammas, VarianceTerms,
};
pub use equilibrium::{
    build_t, solve_from, solve_fundamental, solve_on_grid, ttilde_consistency_residual, ttilde_diag_identity_residual,
    write_matrix_binary, EquilibriumSolution, EquilibriumSummary, SolverOptions,
};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use model::{sample_sigma, specular, EntryDistribution, EntryKind, ModelSpec, SampledMatrix};
pub use montecarlo::{
    bias_experiment, covariance_identity_oracle, integral_representation_check, mutual_info, run_experiment,
    stieltjes_trace, BiasComparison, CovarianceReport, MCConfig, MCResult, QuadraticFormSetup,
};
pub use stats::{clt_verdict, ks_test_standard_normal, moment_report, qq_points, NormalityVerdict};
