//! Config-driven driver: scenario presets, experiment execution and output
//! files.

pub mod config;
pub mod error;
pub mod presets;
pub mod runner;

pub use config::{load_config, parse_config, McSettings, OutputKind, Scenario, ScenarioDoc};
pub use error::{CliError, Result};
pub use runner::{run_all, solve_scenario, RunOptions, RunSummary};
