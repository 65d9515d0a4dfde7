use serde::{Deserialize, Serialize};

use super::params::ParameterIndex;
use super::SolverError;
use crate::inference::eliminate_indexed;
use crate::inference::feo::{assignments_of, feo_joint};
use crate::inference::InferenceError;
use crate::network::{Assignment, Evidence, Network, FORMAT_VERSION};
use crate::roles::FeoScenario;

/// `constant + coeffs·θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl LinearForm {
    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.constant + dot(&self.coeffs, theta)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|a| a.abs() <= 1e-15)
    }
}

/// `A=x, B=y` without braces.
pub(crate) fn plain(a: &Assignment) -> String {
    a.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Probability of `event` as an affine function of θ.
///
/// The joint is summed with the control CPT left out, bucketed by the
/// control entry each completion selects; each bucket then multiplies the
/// affine form of that entry.
pub fn linearize_event(network: &Network, index: &ParameterIndex, event: &Evidence) -> LinearForm {
    let c = index.control();
    let cpt = network.cpt(c);
    let mut keep: Vec<usize> = cpt.parents().iter().copied().filter(|&p| event.get(p).is_none()).collect();
    if event.get(c).is_none() {
        keep.push(c);
    }
    let weights = eliminate_indexed(network, &keep, event, Some(c));
    let mut form = LinearForm { coeffs: vec![0.0; index.len()], constant: 0.0 };
    let mut full = event.clone();
    for digits in assignments_of(network, &keep) {
        for (&v, &s) in keep.iter().zip(&digits) {
            full.set(v, s);
        }
        let w = weights.value(&digits);
        if w == 0.0 {
            continue;
        }
        let row = cpt.row_for(&full).expect("control parents are assigned");
        let state = full.get(c).expect("control is assigned");
        let (constant, terms) = index.entry(row, state);
        form.constant += w * constant;
        for (k, a) in terms {
            form.coeffs[k] += w * a;
        }
    }
    form
}

/// Which FEO equality a row encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeoLabel {
    pub justified: Assignment,
    pub sensitive: Assignment,
    pub target: String,
}

/// `coeffs·θ = rhs`, i.e. P(j,s)·P(q,j) − P(j)·P(q,j,s) = 0 expanded over θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FeoEquation {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub label: FeoLabel,
}

impl FeoEquation {
    pub fn residual(&self, theta: &[f64]) -> f64 {
        dot(&self.coeffs, theta) - self.rhs
    }
}

/// `lower ≤ offset + coeffs·θ ≤ upper`; an equality when the bounds coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub offset: f64,
    pub lower: f64,
    pub upper: f64,
    pub label: String,
}

impl LinearConstraint {
    pub fn is_equality(&self) -> bool {
        self.lower == self.upper
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.offset + dot(&self.coeffs, theta)
    }

    pub fn violation(&self, theta: &[f64]) -> f64 {
        let v = self.value(theta);
        (self.lower - v).max(v - self.upper).max(0.0)
    }
}

/// Linear system over the free control entries: FEO equalities, row
/// normalization, box bounds and any feasibility constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct FeoSystem {
    pub index: ParameterIndex,
    pub theta0: Vec<f64>,
    pub equalities: Vec<FeoEquation>,
    pub simplex: Vec<LinearConstraint>,
    pub bounds: Vec<(f64, f64)>,
    pub constraints: Vec<LinearConstraint>,
    /// Human-readable name per parameter, e.g. `College=yes | SES=low, Test=fail`.
    pub labels: Vec<String>,
}

impl FeoSystem {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        self.equalities.iter().map(|e| e.residual(theta)).collect()
    }

    /// Sum of squared FEO residuals.
    pub fn objective(&self, theta: &[f64]) -> f64 {
        self.residuals(theta).iter().map(|r| r * r).sum()
    }

    /// Simplex rows, box bounds and feasibility constraints as one list.
    pub fn side_constraints(&self) -> Vec<LinearConstraint> {
        let n = self.len();
        let mut out = self.simplex.clone();
        for (k, &(lo, hi)) in self.bounds.iter().enumerate() {
            let mut coeffs = vec![0.0; n];
            coeffs[k] = 1.0;
            out.push(LinearConstraint { coeffs, offset: 0.0, lower: lo, upper: hi, label: format!("bounds on {}", self.labels[k]) });
        }
        out.extend(self.constraints.iter().cloned());
        out
    }
}

fn simplex_rows(index: &ParameterIndex, network: &Network) -> Vec<LinearConstraint> {
    use super::params::RowKind;
    let n = index.len();
    let cpt = network.cpt(index.control());
    let name = &network.variable(index.control()).name;
    let mut out = Vec::new();
    for (row, kind) in index.rows().iter().enumerate() {
        let (first, count, lower, upper) = match *kind {
            RowKind::Fixed => continue,
            RowKind::Complement { first } => (first, cpt.cardinality() - 1, f64::NEG_INFINITY, 1.0),
            RowKind::Partial { first, count, fixed_mass } => (first, count, 1.0 - fixed_mass, 1.0 - fixed_mass),
        };
        if count < 2 && lower.is_infinite() {
            continue;
        }
        let mut coeffs = vec![0.0; n];
        coeffs[first..first + count].iter_mut().for_each(|a| *a = 1.0);
        let given = Assignment::from(network.row_given(cpt, row));
        out.push(LinearConstraint { coeffs, offset: 0.0, lower, upper, label: format!("row sum of {name} | {}", plain(&given)) });
    }
    out
}

/// FEO equalities for every (j, s) and every target state but the first.
pub fn build_feo_system(scenario: &FeoScenario, index: &ParameterIndex) -> Result<FeoSystem, SolverError> {
    let net = scenario.network();
    let (jv, sv, q) = (scenario.justified(), scenario.sensitive(), scenario.target());
    let joint = feo_joint(net, jv, sv, q);
    let mut equalities = Vec::new();
    for j in assignments_of(net, jv) {
        let mut ev_j = Evidence::empty(net.len());
        for (&v, &s) in jv.iter().zip(&j) {
            ev_j.set(v, s);
        }
        let mut p_j = 0.0;
        let mut cells = Vec::new();
        for s in assignments_of(net, sv) {
            let prefix: Vec<usize> = j.iter().chain(&s).copied().collect();
            let p_js: f64 = (0..net.cardinality(q))
                .map(|qs| joint.value(&[prefix.as_slice(), &[qs]].concat()))
                .sum();
            if p_js <= 0.0 {
                let mut ev = ev_j.clone();
                for (&v, &st) in sv.iter().zip(&s) {
                    ev.set(v, st);
                }
                return Err(InferenceError::ZeroEvidenceProbability(net.assignment(&ev)).into());
            }
            p_j += p_js;
            cells.push((s, p_js));
        }
        for qs in 1..net.cardinality(q) {
            let l_qj = linearize_event(net, index, &ev_j.clone().with(q, qs));
            for (s, p_js) in &cells {
                let mut ev = ev_j.clone().with(q, qs);
                for (&v, &st) in sv.iter().zip(s) {
                    ev.set(v, st);
                }
                let l_qjs = linearize_event(net, index, &ev);
                let coeffs = l_qj.coeffs.iter().zip(&l_qjs.coeffs).map(|(a, b)| p_js * a - p_j * b).collect();
                let rhs = -(p_js * l_qj.constant - p_j * l_qjs.constant);
                let pick = |vars: &[usize], states: &[usize]| -> Assignment {
                    vars.iter()
                        .zip(states)
                        .map(|(&v, &st)| (net.variable(v).name.clone(), net.variable(v).states[st].clone()))
                        .collect()
                };
                let label = FeoLabel {
                    justified: pick(jv, &j),
                    sensitive: pick(sv, s),
                    target: net.variable(q).states[qs].clone(),
                };
                equalities.push(FeoEquation { coeffs, rhs, label });
            }
        }
    }
    Ok(FeoSystem {
        theta0: index.current(),
        simplex: simplex_rows(index, net),
        bounds: index.bounds(),
        index: index.clone(),
        equalities,
        constraints: Vec::new(),
        labels: parameter_labels(net, index),
    })
}

fn parameter_labels(network: &Network, index: &ParameterIndex) -> Vec<String> {
    let c = index.control();
    let var = network.variable(c);
    index
        .coordinates()
        .iter()
        .map(|k| {
            let given = Assignment::from(network.row_given(network.cpt(c), k.row));
            format!("{}={} | {}", var.name, var.states[k.state], plain(&given))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintOp {
    Eq,
    Le,
    Ge,
    Interval,
}

/// A bound on the marginal probability of a partial assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalConstraint {
    pub event: Assignment,
    pub op: ConstraintOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<[f64; 2]>,
}

impl MarginalConstraint {
    pub fn le(event: Assignment, value: f64) -> Self {
        Self { event, op: ConstraintOp::Le, value: Some(value), values: None }
    }

    pub fn ge(event: Assignment, value: f64) -> Self {
        Self { event, op: ConstraintOp::Ge, value: Some(value), values: None }
    }

    pub fn eq(event: Assignment, value: f64) -> Self {
        Self { event, op: ConstraintOp::Eq, value: Some(value), values: None }
    }

    pub fn interval(event: Assignment, lower: f64, upper: f64) -> Self {
        Self { event, op: ConstraintOp::Interval, value: None, values: Some([lower, upper]) }
    }

    /// Bounds on P(event), checked to lie in [0, 1] and be nonempty.
    pub fn bounds(&self) -> Result<(f64, f64), SolverError> {
        let bad = |reason: &str| SolverError::MalformedConstraint { constraint: self.describe(), reason: reason.into() };
        let (lo, hi) = match (self.op, self.value, self.values) {
            (ConstraintOp::Eq, Some(v), None) => (v, v),
            (ConstraintOp::Le, Some(v), None) => (0.0, v),
            (ConstraintOp::Ge, Some(v), None) => (v, 1.0),
            (ConstraintOp::Interval, None, Some([a, b])) => (a, b),
            (ConstraintOp::Interval, ..) => return Err(bad("interval needs `values: [lower, upper]`")),
            _ => return Err(bad("eq, le and ge need a single `value`")),
        };
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(bad("bounds must lie in [0, 1]"));
        }
        if lo > hi {
            return Err(bad("empty interval"));
        }
        Ok((lo, hi))
    }

    pub fn describe(&self) -> String {
        let p = format!("P({})", plain(&self.event));
        match (self.op, self.value, self.values) {
            (ConstraintOp::Eq, Some(v), _) => format!("{p} = {v}"),
            (ConstraintOp::Le, Some(v), _) => format!("{p} <= {v}"),
            (ConstraintOp::Ge, Some(v), _) => format!("{p} >= {v}"),
            (ConstraintOp::Interval, _, Some([a, b])) => format!("{p} in [{a}, {b}]"),
            _ => format!("{p} (malformed)"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintsDocObject {
    format_version: u32,
    constraints: Vec<MarginalConstraint>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConstraintsDocAny {
    Object(ConstraintsDocObject),
    List(Vec<MarginalConstraint>),
}

/// Parses a constraints document: either a bare list or
/// `{format_version, constraints}`. Every entry's bounds are checked.
pub fn parse_constraints(text: &str) -> Result<Vec<MarginalConstraint>, SolverError> {
    let doc: ConstraintsDocAny =
        serde_json::from_str(text).map_err(|e| SolverError::Parse(e.to_string()))?;
    let list = match doc {
        ConstraintsDocAny::Object(o) => {
            if o.format_version != FORMAT_VERSION {
                return Err(SolverError::Parse(format!("unsupported format_version {}", o.format_version)));
            }
            o.constraints
        }
        ConstraintsDocAny::List(l) => l,
    };
    for c in &list {
        c.bounds()?;
    }
    Ok(list)
}

pub fn constraints_to_json(constraints: &[MarginalConstraint]) -> String {
    let doc = ConstraintsDocObject { format_version: FORMAT_VERSION, constraints: constraints.to_vec() };
    serde_json::to_string_pretty(&doc).expect("constraints serialize")
}

/// Appends one linear row per marginal constraint. A constraint whose event
/// does not depend on θ, or whose bounds lie outside what θ can reach, is
/// rejected immediately.
pub fn add_feasibility_constraints(
    scenario: &FeoScenario,
    mut system: FeoSystem,
    constraints: &[MarginalConstraint],
) -> Result<FeoSystem, SolverError> {
    let net = scenario.network();
    for c in constraints {
        let (lo, hi) = c.bounds()?;
        let event = net.evidence(&c.event).map_err(InferenceError::from)?;
        let form = linearize_event(net, &system.index, &event);
        let label = c.describe();
        let value = form.eval(&system.theta0);
        if form.is_constant() {
            if value < lo - 1e-9 || value > hi + 1e-9 {
                return Err(SolverError::ZeroCoefficientConstraint { constraint: label, value });
            }
        } else {
            let (rmin, rmax) = system.index.attainable_range(&form.coeffs);
            let (amin, amax) = (form.constant + rmin, form.constant + rmax);
            if amax < lo - 1e-9 || amin > hi + 1e-9 {
                return Err(SolverError::BoundOutOfRange { constraint: label, attainable: (amin, amax) });
            }
        }
        system.constraints.push(LinearConstraint { coeffs: form.coeffs, offset: form.constant, lower: lo, upper: hi, label });
    }
    Ok(system)
}
