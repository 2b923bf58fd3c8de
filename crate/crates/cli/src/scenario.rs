//! Scenario files: model parameters, solver settings, an optional strategy
//! and optional budget grids, all in TOML.
//!
//! ```toml
//! beta = 0.6
//! gamma = 0.2
//!
//! [strategy]
//! kind = "single_lockdown"
//! start = 23.6
//! duration = 20
//! level = 0.75
//!
//! [budgets]
//! c1 = 15
//! c_inf = [0.5, 0.75, 1.0]
//! ```
//!
//! Every key is optional; omitted keys take the default epidemic
//! (`beta = 0.6`, `gamma = 0.2`, `s0 = 0.9999`, `i0 = 0.0001`).

use std::fs;
use std::path::Path;

use lockdown_core::{ControlStrategy, EpidemicParams, EpidemicState, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub c1: OneOrMany,
    pub c_inf: OneOrMany,
}

/// On-disk layout of a scenario.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<ControlStrategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Budgets>,
}

/// A validated scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub params: EpidemicParams,
    pub initial: EpidemicState,
    pub solver: SolverOptions,
    pub strategy: Option<ControlStrategy>,
    pub budgets: Option<(Vec<f64>, Vec<f64>)>,
}

fn field<T>(name: &'static str, r: lockdown_core::Result<T>) -> Result<T> {
    r.map_err(|source| CliError::Field { field: name, source })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |message: String| CliError::Parse { path: path.into(), message };
        let file: ScenarioFile = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        // Serde ignores extra keys on field-less kinds.
        if matches!(file.strategy, Some(ControlStrategy::Zero)) {
            let raw: toml::Table = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
            if let Some(extra) = raw["strategy"].as_table().and_then(|t| t.keys().find(|k| *k != "kind")) {
                return Err(parse_err(format!("unknown field `{extra}` for strategy kind `zero`")));
            }
        }
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let defaults = Scenario::default();
        let params = field(
            "beta/gamma",
            EpidemicParams::new(
                file.beta.unwrap_or(defaults.params.beta()),
                file.gamma.unwrap_or(defaults.params.gamma()),
            ),
        )?;
        let initial = field(
            "s0/i0",
            EpidemicState::new(file.s0.unwrap_or(defaults.initial.s), file.i0.unwrap_or(defaults.initial.i)),
        )?;
        let mut solver = defaults.solver;
        if let Some(step) = file.step {
            solver.step = step;
        }
        if let Some(horizon) = file.horizon {
            solver.horizon = horizon;
        }
        field("step/horizon", solver.validate())?;
        if let Some(strategy) = &file.strategy {
            field("strategy", strategy.validate())?;
        }
        let budgets = match file.budgets {
            None => None,
            Some(b) => {
                let (c1, c_inf) = (b.c1.values(), b.c_inf.values());
                if c1.is_empty() || c_inf.is_empty() {
                    return Err(CliError::Invalid("budgets.c1 and budgets.c_inf must be nonempty".into()));
                }
                if let Some(bad) = c1.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
                    return Err(CliError::Invalid(format!("budgets.c1 = {bad} must be finite and >= 0")));
                }
                if let Some(bad) = c_inf.iter().find(|c| !(**c > 0.0 && **c <= 1.0)) {
                    return Err(CliError::Invalid(format!("budgets.c_inf = {bad} outside (0, 1]")));
                }
                Some((c1, c_inf))
            }
        };
        Ok(Self { params, initial, solver, strategy: file.strategy, budgets })
    }

    /// Fully explicit file form of this scenario.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            beta: Some(self.params.beta()),
            gamma: Some(self.params.gamma()),
            s0: Some(self.initial.s),
            i0: Some(self.initial.i),
            step: Some(self.solver.step),
            horizon: Some(self.solver.horizon),
            strategy: self.strategy.clone(),
            budgets: self
                .budgets
                .as_ref()
                .map(|(c1, c_inf)| Budgets { c1: OneOrMany::Many(c1.clone()), c_inf: OneOrMany::Many(c_inf.clone()) }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario serializes to TOML")
    }

    pub fn strategy(&self) -> ControlStrategy {
        self.strategy.clone().unwrap_or(ControlStrategy::Zero)
    }
}
