//! Repairs the control variable's CPT so the target becomes independent of
//! the sensitive variables given the justified ones, or as close to that as
//! the constraints allow.

mod params;
mod qp;
mod report;
mod solve;
mod system;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::inference::{feo_table, ConditionalTable, InferenceError};
use crate::network::{Network, NetworkError};
use crate::roles::FeoScenario;

pub use params::{Coordinate, ParameterIndex, RowKind};
pub use report::{ConstraintReport, ParameterReport, ResidualReport, SolutionReport};
pub use solve::{apply_solution, solve, solve_closest, solve_exact, Solution, SolveMode, SolveStatus, EXACT_TOLERANCE};
pub use system::{
    add_feasibility_constraints, build_feo_system, constraints_to_json, linearize_event, parse_constraints,
    ConstraintOp, FeoEquation, FeoLabel, FeoSystem, LinearConstraint, LinearForm, MarginalConstraint,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot parse constraints: {0}")]
    Parse(String),
    #[error("fixed entries of control row {given:?} already sum to {fixed_mass}")]
    OverfullRow { given: BTreeMap<String, String>, fixed_mass: f64 },
    #[error("constraint {constraint}: {reason}")]
    MalformedConstraint { constraint: String, reason: String },
    #[error("constraint {constraint} does not depend on the control CPT and its value {value} violates it")]
    ZeroCoefficientConstraint { constraint: String, value: f64 },
    #[error("constraint {constraint} is outside the attainable range [{}, {}]", .attainable.0, .attainable.1)]
    BoundOutOfRange { constraint: String, attainable: (f64, f64) },
    #[error("feasibility constraints are jointly infeasible: {}", .conflict.join("; "))]
    InfeasibleConstraints { conflict: Vec<String> },
    #[error("no control CPT satisfies the equalities exactly")]
    NoExactSolution,
    #[error("solution does not produce a valid network: {0}")]
    ValidationFailed(NetworkError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl SolverError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse(_) => "ConstraintParse",
            Self::OverfullRow { .. } => "OverfullRow",
            Self::MalformedConstraint { .. } => "MalformedConstraint",
            Self::ZeroCoefficientConstraint { .. } => "ZeroCoefficientConstraint",
            Self::BoundOutOfRange { .. } => "BoundOutOfRange",
            Self::InfeasibleConstraints { .. } => "InfeasibleConstraints",
            Self::NoExactSolution => "NoExactSolution",
            Self::ValidationFailed(_) => "ValidationFailed",
            Self::Inference(e) => e.kind(),
        }
    }

    /// Whether the failure means "no admissible CPT" rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Self::ZeroCoefficientConstraint { .. }
                | Self::BoundOutOfRange { .. }
                | Self::InfeasibleConstraints { .. }
                | Self::NoExactSolution
        )
    }
}

/// Everything produced by one end-to-end solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub system: FeoSystem,
    pub solution: Solution,
    pub network: Network,
    pub pre: ConditionalTable,
    pub post: ConditionalTable,
}

impl SolveOutcome {
    pub fn report(&self, scenario: &FeoScenario) -> SolutionReport {
        SolutionReport::new(scenario, &self.system, &self.solution, Some((self.pre.deviation(), self.post.deviation())))
    }
}

/// Builds the system, attaches constraints, solves and applies the result.
pub fn solve_scenario(
    scenario: &FeoScenario,
    constraints: &[MarginalConstraint],
    mode: SolveMode,
) -> Result<SolveOutcome, SolverError> {
    let pre = feo_table(scenario)?;
    let index = ParameterIndex::enumerate(scenario)?;
    let system = build_feo_system(scenario, &index)?;
    let system = add_feasibility_constraints(scenario, system, constraints)?;
    let solution = solve(&system, mode)?;
    let network = apply_solution(scenario, &system, &solution)?;
    let post = feo_table(&scenario.with_network(network.clone()))?;
    Ok(SolveOutcome { system, solution, network, pre, post })
}
