//! Scenario configuration documents.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use rmt_clt::{EntryDistribution, EntryKind, ModelSpec, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::presets;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Equilibrium,
    Report,
    McCsv,
    QqCsv,
    VerdictJson,
}

impl OutputKind {
    pub const ALL: [OutputKind; 5] = [
        OutputKind::Equilibrium,
        OutputKind::Report,
        OutputKind::McCsv,
        OutputKind::QqCsv,
        OutputKind::VerdictJson,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}

/// A scenario as written in a config file. With `preset`, every other
/// field is an optional override of the preset's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ModelSpec>,
    /// Replaces the entry law of the spec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<EntryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<BTreeSet<OutputKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScenarioDoc", try_from = "ScenarioDoc")]
pub struct Scenario {
    pub name: String,
    pub spec: ModelSpec,
    pub rho_grid: Vec<f64>,
    pub mc: Option<McSettings>,
    pub outputs: BTreeSet<OutputKind>,
    pub solver: SolverOptions,
}

impl From<Scenario> for ScenarioDoc {
    fn from(s: Scenario) -> Self {
        let (rho, rho_grid) = match s.rho_grid.as_slice() {
            [rho] => (Some(*rho), None),
            _ => (None, Some(s.rho_grid)),
        };
        ScenarioDoc {
            name: s.name,
            preset: None,
            spec: Some(s.spec),
            dist: None,
            rho,
            rho_grid,
            mc: s.mc,
            outputs: Some(s.outputs),
            solver: (s.solver != SolverOptions::default()).then_some(s.solver),
        }
    }
}

impl TryFrom<ScenarioDoc> for Scenario {
    type Error = CliError;

    fn try_from(doc: ScenarioDoc) -> Result<Self> {
        doc.resolve()
    }
}

impl ScenarioDoc {
    pub fn resolve(self) -> Result<Scenario> {
        let err = |msg: &str| CliError::Config(format!("scenario {}: {msg}", self.name));
        let base = match &self.preset {
            Some(p) => Some(presets::find(p).ok_or_else(|| err(&format!("unknown preset {p:?}")))?),
            None => None,
        };
        let mut spec = match (&self.spec, &base) {
            (Some(s), _) => s.clone(),
            (None, Some(b)) => b.spec.clone(),
            (None, None) => return Err(err("needs a spec or a preset")),
        };
        if let Some(kind) = self.dist {
            spec = spec.with_dist(EntryDistribution::new(kind).map_err(|e| err(&e.to_string()))?);
        }
        let rho_grid = match (self.rho, &self.rho_grid, &base) {
            (Some(_), Some(_), _) => return Err(err("give either rho or rho_grid, not both")),
            (Some(r), None, _) => vec![r],
            (None, Some(g), _) => g.clone(),
            (None, None, Some(b)) => b.rho_grid.clone(),
            (None, None, None) => return Err(err("needs rho or rho_grid")),
        };
        if rho_grid.is_empty() || rho_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(err("rho values must be positive and finite"));
        }
        let mc = self.mc.or(base.as_ref().and_then(|b| b.mc));
        if let Some(m) = mc {
            if m.replicates < 2 || m.workers == 0 {
                return Err(err("mc needs replicates >= 2 and workers >= 1"));
            }
        }
        let outputs = self
            .outputs
            .clone()
            .or(base.as_ref().map(|b| b.outputs.clone()))
            .unwrap_or_else(|| OutputKind::ALL.into_iter().collect());
        let solver = self.solver.or(base.as_ref().map(|b| b.solver)).unwrap_or_default();
        Ok(Scenario {
            name: self.name,
            spec,
            rho_grid,
            mc,
            outputs,
            solver,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub schema_version: u32,
    #[serde(default)]
    pub scenarios: Vec<ScenarioDoc>,
}

pub fn parse_config(text: &str, path: &Path) -> Result<Vec<Scenario>> {
    let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    let mut seen = HashSet::new();
    let mut scenarios = Vec::with_capacity(doc.scenarios.len());
    for s in doc.scenarios {
        if s.name.is_empty() || s.name.contains(['/', '\\']) || s.name.starts_with('.') {
            return Err(CliError::Config(format!("invalid scenario name {:?}", s.name)));
        }
        if !seen.insert(s.name.clone()) {
            return Err(CliError::Config(format!("duplicate scenario name {:?}", s.name)));
        }
        scenarios.push(s.resolve()?);
    }
    Ok(scenarios)
}

pub fn load_config(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<Scenario>> {
        parse_config(text, Path::new("cfg.json"))
    }

    #[test]
    fn preset_with_overrides() {
        let s = parse(
            r#"{"schema_version": 1, "scenarios": [
                {"name": "a", "preset": "mp-unit", "rho": 2.0, "dist": {"kind": "QPSK"},
                 "mc": {"replicates": 10, "master_seed": 3}, "outputs": ["report"]}
            ]}"#,
        )
        .unwrap();
        assert_eq!(s[0].rho_grid, vec![2.0]);
        assert_eq!(s[0].spec.dist().kind(), EntryKind::Qpsk);
        assert_eq!(s[0].mc.unwrap().workers, 1);
        assert_eq!(s[0].outputs.len(), 1);
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse("{\n  \"schema_version\": 1,\n  \"scenarios\": [,]\n}") {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 17)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            r#"{"schema_version": 2, "scenarios": []}"#,
            r#"{"schema_version": 1, "scenarios": [{"name": "a", "preset": "nope"}]}"#,
            r#"{"schema_version": 1, "scenarios": [{"name": "a", "preset": "mp-unit"}, {"name": "a", "preset": "qpsk"}]}"#,
            r#"{"schema_version": 1, "scenarios": [{"name": "a", "preset": "mp-unit", "rho": 1, "rho_grid": [1]}]}"#,
            r#"{"schema_version": 1, "scenarios": [{"name": "a", "preset": "mp-unit", "rho": -1}]}"#,
            r#"{"schema_version": 1, "scenarios": [{"name": "../x", "preset": "mp-unit"}]}"#,
            r#"{"schema_version": 1, "scenarios": [{"name": "a", "rho": 1}]}"#,
        ];
        for c in cases {
            assert!(matches!(parse(c), Err(CliError::Config(_))), "{c}");
        }
        assert!(matches!(
            parse(r#"{"schema_version": 1, "scenarios": [{"name": "a", "preset": "mp-unit", "bogus": 1}]}"#),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn empty_scenario_list() {
        assert!(parse(r#"{"schema_version": 1, "scenarios": []}"#).unwrap().is_empty());
    }
}
