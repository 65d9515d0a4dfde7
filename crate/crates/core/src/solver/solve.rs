use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::qp::Qp;
use super::system::{FeoSystem, LinearConstraint};
use super::SolverError;
use crate::network::Network;
use crate::roles::FeoScenario;

/// Largest FEO residual for which a solution counts as exact.
pub const EXACT_TOLERANCE: f64 = 1e-8;
const ACTIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Exact,
    Closest,
    InfeasibleConstraints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Exact when possible, closest otherwise.
    #[default]
    Auto,
    Exact,
    Closest,
}

impl std::str::FromStr for SolveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "closest" => Ok(Self::Closest),
            other => Err(format!("unknown solve mode `{other}` (expected auto, exact or closest)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub theta: Vec<f64>,
    pub status: SolveStatus,
    /// Signed residual per FEO equality, in system order.
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub objective: f64,
    /// Labels of side constraints sitting on a bound.
    pub active: Vec<String>,
}

impl Solution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn add_side(qp: &mut Qp, rows: &[LinearConstraint]) {
    for c in rows {
        qp.bounded(&c.coeffs, c.lower - c.offset, c.upper - c.offset);
    }
}

fn clamp_to_box(system: &FeoSystem, theta: &mut [f64]) {
    for (t, &(lo, hi)) in theta.iter_mut().zip(&system.bounds) {
        *t = t.clamp(lo, hi);
    }
}

fn finish(system: &FeoSystem, mut theta: Vec<f64>) -> Solution {
    clamp_to_box(system, &mut theta);
    let residuals = system.residuals(&theta);
    let objective = residuals.iter().map(|r| r * r).sum();
    let active = system
        .side_constraints()
        .into_iter()
        .filter(|c| {
            let v = c.value(&theta);
            (v - c.lower).abs() <= ACTIVE_TOLERANCE || (v - c.upper).abs() <= ACTIVE_TOLERANCE
        })
        .map(|c| c.label)
        .collect();
    let max = residuals.iter().fold(0.0f64, |m: f64, r: &f64| m.max(r.abs()));
    let status = if max <= EXACT_TOLERANCE { SolveStatus::Exact } else { SolveStatus::Closest };
    Solution { theta, status, residuals, objective, active }
}

/// θ satisfying every FEO equality and side constraint, nearest to the
/// current CPT; `None` when no such θ exists.
pub fn solve_exact(system: &FeoSystem) -> Option<Solution> {
    let mut qp = Qp::distance(&system.theta0);
    for e in &system.equalities {
        qp.bounded(&e.coeffs, e.rhs, e.rhs);
    }
    add_side(&mut qp, &system.side_constraints());
    let theta = qp.solve()?;
    let sol = finish(system, theta);
    let side_ok = system.side_constraints().iter().all(|c| c.violation(&sol.theta) <= EXACT_TOLERANCE);
    (sol.status == SolveStatus::Exact && side_ok).then_some(sol)
}

/// Nearest point to the current CPT satisfying the side constraints only.
fn project(system: &FeoSystem, side: &[LinearConstraint]) -> Option<Vec<f64>> {
    let mut qp = Qp::distance(&system.theta0);
    add_side(&mut qp, side);
    qp.solve()
}

/// Deletion filter: drops feasibility constraints one at a time while the
/// rest stay infeasible, leaving an irreducible conflicting subset.
fn conflicting_subset(system: &FeoSystem) -> Vec<String> {
    let base = FeoSystem { constraints: Vec::new(), ..system.clone() }.side_constraints();
    let mut keep: Vec<LinearConstraint> = system.constraints.clone();
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        let rows: Vec<LinearConstraint> = base.iter().cloned().chain(trial.iter().cloned()).collect();
        if project(system, &rows).is_none() {
            keep = trial;
        } else {
            i += 1;
        }
    }
    keep.into_iter().map(|c| c.label).collect()
}

/// θ minimizing the sum of squared FEO residuals under the side
/// constraints. Among minimizers, the one nearest the current CPT is chosen.
pub fn solve_closest(system: &FeoSystem) -> Result<Solution, SolverError> {
    if let Some(sol) = solve_exact(system) {
        return Ok(sol);
    }
    let side = system.side_constraints();
    let Some(feasible) = project(system, &side) else {
        return Err(SolverError::InfeasibleConstraints { conflict: conflicting_subset(system) });
    };
    let n = system.len();
    let m = system.equalities.len();
    let a = DMatrix::from_fn(m, n, |i, j| system.equalities[i].coeffs[j]);
    let b = DVector::from_iterator(m, system.equalities.iter().map(|e| e.rhs));
    let ata = a.transpose() * &a;
    let trace = ata.trace();
    let theta1 = if n == 0 || trace <= 1e-300 {
        feasible
    } else {
        // a tiny proximal term keeps the Hessian positive definite
        let mu = 1e-9 * trace / n as f64;
        let theta0 = DVector::from_column_slice(&system.theta0);
        let h = (&ata + DMatrix::identity(n, n) * mu) * 2.0;
        let f = (a.transpose() * &b + theta0 * mu) * -2.0;
        let mut qp = Qp::new(h, f);
        add_side(&mut qp, &side);
        qp.solve().unwrap_or(feasible)
    };
    // second stage: nearest point among those with the same residual vector
    let mut qp = Qp::distance(&system.theta0);
    let t1 = DVector::from_column_slice(&theta1);
    for (i, e) in system.equalities.iter().enumerate() {
        let target = a.row(i).dot(&t1.transpose());
        qp.bounded(&e.coeffs, target, target);
    }
    add_side(&mut qp, &side);
    let theta = match qp.solve() {
        Some(t2) if system.objective(&t2) <= system.objective(&theta1) + 1e-15 => t2,
        _ => theta1,
    };
    Ok(finish(system, theta))
}

pub fn solve(system: &FeoSystem, mode: SolveMode) -> Result<Solution, SolverError> {
    match mode {
        SolveMode::Exact => solve_exact(system).ok_or(SolverError::NoExactSolution),
        SolveMode::Auto | SolveMode::Closest => solve_closest(system),
    }
}

/// The scenario's network with the control CPT rebuilt from θ.
pub fn apply_solution(scenario: &FeoScenario, system: &FeoSystem, solution: &Solution) -> Result<Network, SolverError> {
    let probs = system.index.cpt_values(&solution.theta);
    scenario.network().with_cpt(scenario.control(), probs).map_err(SolverError::ValidationFailed)
}
