use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::solve::{Solution, SolveStatus};
use super::system::{FeoLabel, FeoSystem};
use crate::network::{Assignment, FORMAT_VERSION};
use crate::roles::FeoScenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterReport {
    pub given: BTreeMap<String, String>,
    pub state: String,
    pub original: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub justified: Assignment,
    pub sensitive: Assignment,
    pub target: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub constraint: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub active: bool,
}

/// JSON-facing summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub format_version: u32,
    pub control: String,
    pub status: SolveStatus,
    pub objective: f64,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_deviation: Option<f64>,
    pub parameters: Vec<ParameterReport>,
    pub residuals: Vec<ResidualReport>,
    pub constraints: Vec<ConstraintReport>,
    pub active_constraints: Vec<String>,
}

impl SolutionReport {
    pub fn new(scenario: &FeoScenario, system: &FeoSystem, solution: &Solution, deviations: Option<(f64, f64)>) -> Self {
        let net = scenario.network();
        let c = scenario.control();
        let cpt = net.cpt(c);
        let parameters = system
            .index
            .coordinates()
            .iter()
            .zip(system.theta0.iter().zip(&solution.theta))
            .map(|(k, (&original, &value))| ParameterReport {
                given: net.row_given(cpt, k.row),
                state: net.variable(c).states[k.state].clone(),
                original,
                value,
            })
            .collect();
        let residuals = system
            .equalities
            .iter()
            .zip(&solution.residuals)
            .map(|(e, &residual)| {
                let FeoLabel { justified, sensitive, target } = e.label.clone();
                ResidualReport { justified, sensitive, target, residual }
            })
            .collect();
        let constraints = system
            .constraints
            .iter()
            .map(|k| ConstraintReport {
                constraint: k.label.clone(),
                value: k.value(&solution.theta),
                lower: k.lower,
                upper: k.upper,
                active: solution.active.contains(&k.label),
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            control: net.variable(c).name.clone(),
            status: solution.status,
            objective: solution.objective,
            max_residual: solution.max_residual(),
            pre_deviation: deviations.map(|d| d.0),
            post_deviation: deviations.map(|d| d.1),
            parameters,
            residuals,
            constraints,
            active_constraints: solution.active.clone(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
