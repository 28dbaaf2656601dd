//! Scenario execution and output files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rmt_clt::montecarlo::{compare_bias, run_experiment_with_report, BiasComparison};
use rmt_clt::stats::qq_csv;
use rmt_clt::{
    fluctuation_report, qq_points, solve_on_grid, ttilde_consistency_residual, ttilde_diag_identity_residual,
    write_matrix_binary, EquilibriumSolution, EquilibriumSummary, FluctuationReport, MCConfig, ModelSpec,
    NormalityVerdict,
};
use serde::Serialize;

use crate::config::{OutputKind, Scenario, SCHEMA_VERSION};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub seed_override: Option<u64>,
    pub alpha: f64,
    pub var_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: None,
            seed_override: None,
            alpha: 0.01,
            var_tol: 0.15,
        }
    }
}

/// Residuals checked at every solved `ρ`.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub rho: f64,
    pub fixed_point_residual: f64,
    pub ttilde_consistency: f64,
    pub ttilde_diagonal: f64,
    pub delta_coincidence: f64,
    pub bounds_ok: bool,
    pub pass: bool,
}

const FIXED_POINT_TOL: f64 = 1e-11;
const IDENTITY_TOL: f64 = 1e-8;

pub fn invariants(
    spec: &ModelSpec,
    sol: &EquilibriumSolution,
    report: &FluctuationReport,
) -> rmt_clt::Result<InvariantReport> {
    let (r1, r2) = sol.fixed_point_residuals(spec);
    let fixed_point_residual = r1.max(r2);
    let ttilde_consistency = ttilde_consistency_residual(spec, sol);
    let ttilde_diagonal = ttilde_diag_identity_residual(spec, sol)?;
    let delta_coincidence = (report.bold_delta_n - report.delta).abs() / report.delta;
    let pass = fixed_point_residual <= FIXED_POINT_TOL
        && ttilde_consistency <= IDENTITY_TOL
        && ttilde_diagonal <= IDENTITY_TOL
        && delta_coincidence <= IDENTITY_TOL
        && report.bounds_ok;
    Ok(InvariantReport {
        rho: sol.rho,
        fixed_point_residual,
        ttilde_consistency,
        ttilde_diagonal,
        delta_coincidence,
        bounds_ok: report.bounds_ok,
        pass,
    })
}

/// Deterministic part of a scenario: solutions, reports and invariant checks.
pub struct Solved {
    pub solutions: Vec<EquilibriumSolution>,
    pub reports: Vec<FluctuationReport>,
    pub invariants: Vec<InvariantReport>,
}

pub fn solve_scenario(s: &Scenario) -> Result<Solved> {
    let core_err = |e| CliError::from_core(&s.name, e);
    let solutions = solve_on_grid(&s.spec, &s.rho_grid, &s.solver).map_err(core_err)?;
    let mut reports = Vec::with_capacity(solutions.len());
    let mut invs = Vec::with_capacity(solutions.len());
    for sol in &solutions {
        let report = fluctuation_report(&s.spec, sol).map_err(core_err)?;
        invs.push(invariants(&s.spec, sol, &report).map_err(core_err)?);
        reports.push(report);
    }
    Ok(Solved {
        solutions,
        reports,
        invariants: invs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictDoc {
    pub schema_version: u32,
    pub scenario: String,
    pub rho: f64,
    pub replicates: usize,
    pub config_digest: String,
    pub verdict: NormalityVerdict,
    /// Present when a bias prediction exists for the model.
    pub bias: Option<BiasComparison>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub invariants_pass: bool,
    /// `None` without Monte Carlo.
    pub verdicts_pass: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenarios: Vec<ScenarioOutcome>,
    pub pass: bool,
}

impl RunSummary {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write(path, text)
}

fn write_matrix(path: PathBuf, m: &rmt_clt::CMatrix) -> Result<()> {
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_matrix_binary(BufWriter::new(file), m).map_err(|e| CliError::io(path, e))
}

pub fn run_scenario(s: &Scenario, out_dir: &Path, opts: &RunOptions) -> Result<ScenarioOutcome> {
    let solved = solve_scenario(s)?;
    let dir = out_dir.join(&s.name);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let wants = |k: OutputKind| s.outputs.contains(&k);

    if wants(OutputKind::Equilibrium) {
        let summaries: Vec<EquilibriumSummary> = solved.solutions.iter().map(EquilibriumSolution::summary).collect();
        write_json(
            dir.join("equilibrium.json"),
            &serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "scenario": s.name,
                "N": s.spec.n_rows(),
                "n": s.spec.n_cols(),
                "solutions": summaries,
            }),
        )?;
        for (i, sol) in solved.solutions.iter().enumerate() {
            write_matrix(dir.join(format!("t_{i}.bin")), &sol.t)?;
            write_matrix(dir.join(format!("t_tilde_{i}.bin")), &sol.t_tilde)?;
        }
    }
    if wants(OutputKind::Report) {
        write_json(
            dir.join("report.json"),
            &serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "scenario": s.name,
                "reports": solved.reports,
                "invariants": solved.invariants,
            }),
        )?;
        let mut csv = format!("{}\n", FluctuationReport::CSV_HEADER);
        for r in &solved.reports {
            csv.push_str(&r.csv_row());
            csv.push('\n');
        }
        write(dir.join("report.csv"), csv)?;
    }

    let invariants_pass = solved.invariants.iter().all(|i| i.pass);
    let mut verdicts_pass = None;
    if let Some(mc) = s.mc {
        let mut all = true;
        for (i, (rho, report)) in s.rho_grid.iter().zip(&solved.reports).enumerate() {
            let cfg = MCConfig::new(
                s.spec.clone(),
                *rho,
                mc.replicates,
                opts.seed_override.unwrap_or(mc.master_seed),
            )
            .with_workers(opts.workers.unwrap_or(mc.workers));
            let result = run_experiment_with_report(&cfg, report).map_err(|e| CliError::from_core(&s.name, e))?;
            if wants(OutputKind::McCsv) {
                write(dir.join(format!("mc_{i}.csv")), result.to_csv())?;
                write_json(dir.join(format!("mc_summary_{i}.json")), &result.summary())?;
            }
            if wants(OutputKind::QqCsv) {
                let pts = qq_points(&result.standardized).map_err(|e| CliError::from_core(&s.name, e))?;
                write(dir.join(format!("qq_{i}.csv")), qq_csv(&pts))?;
            }
            let verdict = rmt_clt::clt_verdict(&result, report, opts.alpha, opts.var_tol)
                .map_err(|e| CliError::from_core(&s.name, e))?;
            all &= verdict.pass;
            if wants(OutputKind::VerdictJson) {
                let doc = VerdictDoc {
                    schema_version: SCHEMA_VERSION,
                    scenario: s.name.clone(),
                    rho: *rho,
                    replicates: mc.replicates,
                    config_digest: result.config_digest.clone(),
                    verdict,
                    bias: compare_bias(&s.spec, &result, report).ok(),
                };
                write_json(dir.join(format!("verdict_{i}.json")), &doc)?;
            }
        }
        verdicts_pass = Some(all);
    }
    Ok(ScenarioOutcome {
        name: s.name.clone(),
        invariants_pass,
        verdicts_pass,
        pass: invariants_pass && verdicts_pass.unwrap_or(true),
    })
}

/// Runs every scenario in order. Writes `summary.json` and, separately,
/// `metadata.json` with the wall-clock timestamp. Nothing is written for an
/// empty scenario list.
pub fn run_all(scenarios: &[Scenario], out_dir: &Path, opts: &RunOptions, config_path: &Path) -> Result<RunSummary> {
    for (name, v) in [("alpha", opts.alpha), ("var_tol", opts.var_tol)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::Config(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    rmt_clt::stats::ks_critical_value(opts.alpha).map_err(|e| CliError::Config(e.to_string()))?;
    if opts.workers == Some(0) {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    let mut outcomes = Vec::with_capacity(scenarios.len());
    if scenarios.is_empty() {
        return Ok(RunSummary {
            schema_version: SCHEMA_VERSION,
            scenarios: outcomes,
            pass: true,
        });
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    for s in scenarios {
        outcomes.push(run_scenario(s, out_dir, opts)?);
    }
    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        pass: outcomes.iter().all(|o| o.pass),
        scenarios: outcomes,
    };
    write_json(out_dir.join("summary.json"), &summary)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_json(
        out_dir.join("metadata.json"),
        &serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config": config_path.display().to_string(),
            "unix_timestamp": timestamp,
        }),
    )?;
    Ok(summary)
}
