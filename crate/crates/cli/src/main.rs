use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rmt_clt_cli::presets::PRESETS;
use rmt_clt_cli::{load_config, run_all, solve_scenario, CliError, RunOptions, Scenario};

#[derive(Parser)]
#[command(
    name = "rmt-clt",
    version,
    about = "Fluctuations of the mutual information of Gram random matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file and write its outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for Monte Carlo replicates.
        #[arg(long)]
        workers: Option<usize>,
        /// Replaces the master seed of every scenario.
        #[arg(long)]
        seed_override: Option<u64>,
        /// KS level: 0.10, 0.05 or 0.01.
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Accepted deviation of var(N·I_n)/Θ from 1.
        #[arg(long, default_value_t = 0.15)]
        var_tol: f64,
    },
    /// List the built-in scenarios.
    Presets,
    /// Run the deterministic invariant suites (no Monte Carlo) on a config,
    /// or on every preset.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn check(scenarios: &[Scenario]) -> Result<bool, CliError> {
    let mut ok = true;
    for s in scenarios {
        let solved = solve_scenario(s)?;
        for inv in &solved.invariants {
            let tag = if inv.pass { "ok" } else { "FAIL" };
            println!(
                "{:<24} rho={:<8} {tag:<4} fixed-point {:.1e}  consistency {:.1e}  diagonal {:.1e}  delta {:.1e}  bounds {}",
                s.name,
                inv.rho,
                inv.fixed_point_residual,
                inv.ttilde_consistency,
                inv.ttilde_diagonal,
                inv.delta_coincidence,
                if inv.bounds_ok { "ok" } else { "FAIL" },
            );
            ok &= inv.pass;
        }
    }
    Ok(ok)
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            seed_override,
            alpha,
            var_tol,
        } => {
            let scenarios = load_config(&config)?;
            let opts = RunOptions {
                workers,
                seed_override,
                alpha,
                var_tol,
            };
            let summary = run_all(&scenarios, &out, &opts, &config)?;
            for s in &summary.scenarios {
                let verdict = match s.verdicts_pass {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "-",
                };
                let inv = if s.invariants_pass { "pass" } else { "FAIL" };
                println!("{:<24} invariants {inv:<4}  verdict {verdict}", s.name);
            }
            Ok(summary.exit_code())
        }
        Command::Presets => {
            for p in PRESETS {
                println!("{:<24} {}", p.name, p.description);
            }
            Ok(0)
        }
        Command::Check { config } => {
            let scenarios = match config {
                Some(path) => load_config(&path)?,
                None => PRESETS.iter().map(|p| p.scenario()).collect(),
            };
            Ok(if check(&scenarios)? { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
