//! Discrete Bayesian networks: categorical variables, conditional probability
//! tables and the JSON document they are built from.
//!
//! A [`Network`] can only be obtained through [`Network::from_doc`] (or the
//! helpers that wrap it), so every value of the type satisfies the structural
//! invariants: declared edge endpoints, acyclicity, and total, normalized CPTs.
//! Editing operations return new networks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag carried by every document format in this crate.
pub const FORMAT_VERSION: u32 = 1;

/// Tolerance applied to CPT row sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// What is wrong with a CPT in a network document.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum CptProblem {
    Missing,
    Duplicate,
    ParentMismatch { expected: Vec<String>, found: Vec<String> },
    RowMissing { given: BTreeMap<String, String> },
    DuplicateRow { given: BTreeMap<String, String> },
    BadGiven { given: BTreeMap<String, String> },
    WrongLength { given: BTreeMap<String, String>, expected: usize, found: usize },
    OutOfRange { given: BTreeMap<String, String>, state: String, value: f64 },
    BadSum { given: BTreeMap<String, String>, sum: f64 },
}

fn fmt_given(given: &BTreeMap<String, String>) -> String {
    if given.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = given.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

impl fmt::Display for CptProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CptProblem::Missing => write!(f, "no table declared"),
            CptProblem::Duplicate => write!(f, "declared more than once"),
            CptProblem::ParentMismatch { expected, found } => write!(
                f,
                "parents [{}] do not match in-edges [{}]",
                found.join(", "),
                expected.join(", ")
            ),
            CptProblem::RowMissing { given } => write!(f, "row {} missing", fmt_given(given)),
            CptProblem::DuplicateRow { given } => write!(f, "row {} repeated", fmt_given(given)),
            CptProblem::BadGiven { given } => {
                write!(f, "row key {} does not name one state per parent", fmt_given(given))
            }
            CptProblem::WrongLength { given, expected, found } => write!(
                f,
                "row {} has {found} entries, expected {expected}",
                fmt_given(given)
            ),
            CptProblem::OutOfRange { given, state, value } => write!(
                f,
                "row {} entry {state}={value} outside [0,1]",
                fmt_given(given)
            ),
            CptProblem::BadSum { given, sum } => {
                write!(f, "row {} sums to {sum}", fmt_given(given))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("cannot parse network document: {0}")]
    Parse(String),
    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("variable `{0}` needs at least two states")]
    TooFewStates(String),
    #[error("variable `{variable}` repeats state `{state}`")]
    DuplicateState { variable: String, state: String },
    #[error("edge {parent} -> {child} names an undeclared variable")]
    DanglingEdge { parent: String, child: String },
    #[error("edge {parent} -> {child} declared twice")]
    DuplicateEdge { parent: String, child: String },
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("malformed CPT for `{owner}`: {problem}")]
    MalformedCpt { owner: String, problem: CptProblem },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
}

impl NetworkError {
    /// Stable identifier used in diagnostics and problem documents.
    pub fn kind(&self) -> &'static str {
        match self {
            NetworkError::Parse(_) => "Parse",
            NetworkError::UnsupportedVersion(_) => "UnsupportedVersion",
            NetworkError::DuplicateName(_) => "DuplicateName",
            NetworkError::TooFewStates(_) => "TooFewStates",
            NetworkError::DuplicateState { .. } => "DuplicateState",
            NetworkError::DanglingEdge { .. } => "DanglingEdge",
            NetworkError::DuplicateEdge { .. } => "DuplicateEdge",
            NetworkError::CycleDetected(_) => "CycleDetected",
            NetworkError::MalformedCpt { .. } => "MalformedCpt",
            NetworkError::UnknownVariable(_) => "UnknownVariable",
            NetworkError::UnknownState { .. } => "UnknownState",
        }
    }
}

/// Every problem found in a network document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<NetworkError>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let issues: Vec<serde_json::Value> = self
            .issues
            .iter()
            .map(|e| {
                let mut v = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
                if let NetworkError::MalformedCpt { owner, problem } = e {
                    v["owner"] = serde_json::json!(owner);
                    v["detail"] = serde_json::to_value(problem).unwrap_or_default();
                }
                v
            })
            .collect();
        serde_json::json!({ "valid": self.is_valid(), "issues": issues })
    }
}

/// A (possibly partial) assignment of state labels to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.0.insert(variable.into(), state.into());
        self
    }

    pub fn insert(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.0
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl From<BTreeMap<String, String>> for Assignment {
    fn from(map: BTreeMap<String, String>) -> Self {
        Self(map)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_given(&self.0))
    }
}

/// Index-based partial assignment: one optional state index per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Evidence(Vec<Option<usize>>);

impl Evidence {
    pub fn empty(num_variables: usize) -> Self {
        Self(vec![None; num_variables])
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.0[var]
    }

    pub fn set(&mut self, var: usize, state: usize) {
        self.0[var] = Some(state);
    }

    pub fn clear(&mut self, var: usize) {
        self.0[var] = None;
    }

    pub fn with(mut self, var: usize, state: usize) -> Self {
        self.0[var] = Some(state);
        self
    }

    pub fn is_full(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn observed(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().enumerate().filter_map(|(v, s)| s.map(|s| (v, s)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Union of two evidence vectors; `None` when they disagree on a variable.
    pub fn merge(&self, other: &Evidence) -> Option<Evidence> {
        let mut out = self.clone();
        for (v, s) in other.observed() {
            match out.0[v] {
                Some(existing) if existing != s => return None,
                _ => out.0[v] = Some(s),
            }
        }
        Some(out)
    }
}

/// Conditional probability table of one variable, stored row-major: one row
/// per joint parent assignment (first parent most significant), one column
/// per owner state.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    owner: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    card: usize,
    probs: Vec<f64>,
}

impl Cpt {
    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn cardinality(&self) -> usize {
        self.card
    }

    pub fn parent_cardinalities(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn num_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.probs[row * self.card..(row + 1) * self.card]
    }

    pub fn prob(&self, row: usize, state: usize) -> f64 {
        self.probs[row * self.card + state]
    }

    /// Row index of a parent assignment given in declared parent order.
    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parents.len());
        parent_states
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    /// Parent states of a row, in declared parent order.
    pub fn row_states(&self, mut row: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents.len()];
        for (slot, &c) in out.iter_mut().zip(&self.parent_cards).rev() {
            *slot = row % c;
            row /= c;
        }
        out
    }

    /// Row selected by a full (or sufficiently complete) evidence vector.
    pub fn row_for(&self, evidence: &Evidence) -> Option<usize> {
        let mut row = 0;
        for (&p, &c) in self.parents.iter().zip(&self.parent_cards) {
            row = row * c + evidence.get(p)?;
        }
        Some(row)
    }
}

/// A validated discrete Bayesian network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    variables: Vec<Variable>,
    lookup: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    cpts: Vec<Cpt>,
    order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptRowDoc {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptDoc {
    pub owner: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub rows: Vec<CptRowDoc>,
}

/// The JSON network document. Also used without `cpts` as a structure
/// document for parameter learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub format_version: u32,
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub cpts: Vec<CptDoc>,
}

impl Default for NetworkDoc {
    fn default() -> Self {
        Self::new()
    }
}

impl NetworkDoc {
    pub fn new() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            variables: Vec::new(),
            edges: Vec::new(),
            cpts: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("network documents always serialize")
    }

    pub fn variable<S: Into<String>>(mut self, name: &str, states: impl IntoIterator<Item = S>) -> Self {
        self.variables.push(Variable::new(name, states));
        self
    }

    pub fn edge(mut self, parent: &str, child: &str) -> Self {
        self.edges.push((parent.to_string(), child.to_string()));
        self
    }

    /// Declared parents of `name`: its in-edges in declaration order.
    pub fn parents_of(&self, name: &str) -> Vec<String> {
        self.edges
            .iter()
            .filter(|(_, c)| c == name)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Appends a CPT whose rows are listed in mixed-radix order over the
    /// declared parents (first parent most significant). Unknown names
    /// produce `given` maps that fail validation rather than panicking.
    pub fn cpt(mut self, owner: &str, rows: &[&[f64]]) -> Self {
        let parents = self.parents_of(owner);
        let cards: Vec<usize> = parents
            .iter()
            .map(|p| {
                self.variables
                    .iter()
                    .find(|v| &v.name == p)
                    .map_or(1, Variable::cardinality)
            })
            .collect();
        let mut docs = Vec::with_capacity(rows.len());
        for (r, p) in rows.iter().enumerate() {
            let mut rem = r;
            let mut states = vec![0; parents.len()];
            for (slot, &c) in states.iter_mut().zip(&cards).rev() {
                *slot = rem % c;
                rem /= c;
            }
            let given = parents
                .iter()
                .zip(&states)
                .map(|(name, &s)| {
                    let label = self
                        .variables
                        .iter()
                        .find(|v| &v.name == name)
                        .and_then(|v| v.states.get(s).cloned())
                        .unwrap_or_else(|| s.to_string());
                    (name.clone(), label)
                })
                .collect();
            docs.push(CptRowDoc { given, p: p.to_vec() });
        }
        self.cpts.push(CptDoc {
            owner: owner.to_string(),
            parents,
            rows: docs,
        });
        self
    }

    /// Checks every invariant and lists each violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.format_version != FORMAT_VERSION {
            issues.push(NetworkError::UnsupportedVersion(self.format_version));
        }

        let mut lookup: HashMap<&str, usize> = HashMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if lookup.insert(v.name.as_str(), i).is_some() {
                issues.push(NetworkError::DuplicateName(v.name.clone()));
            }
            if v.states.len() < 2 {
                issues.push(NetworkError::TooFewStates(v.name.clone()));
            }
            let mut seen = HashSet::new();
            for s in &v.states {
                if !seen.insert(s.as_str()) {
                    issues.push(NetworkError::DuplicateState {
                        variable: v.name.clone(),
                        state: s.clone(),
                    });
                }
            }
        }

        let mut edges_ok = true;
        let mut seen_edges = HashSet::new();
        for (p, c) in &self.edges {
            if !lookup.contains_key(p.as_str()) || !lookup.contains_key(c.as_str()) {
                issues.push(NetworkError::DanglingEdge { parent: p.clone(), child: c.clone() });
                edges_ok = false;
            } else if !seen_edges.insert((p.as_str(), c.as_str())) {
                issues.push(NetworkError::DuplicateEdge { parent: p.clone(), child: c.clone() });
            }
        }
        if edges_ok {
            let n = self.variables.len();
            let edges: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|(p, c)| (lookup[p.as_str()], lookup[c.as_str()]))
                .collect();
            if let Err(cycle) = topological_order(n, &edges) {
                issues.push(NetworkError::CycleDetected(
                    cycle.iter().map(|&i| self.variables[i].name.clone()).collect(),
                ));
            }
        }

        let mut cpt_seen: HashSet<&str> = HashSet::new();
        for cpt in &self.cpts {
            let owner = cpt.owner.as_str();
            let Some(&oi) = lookup.get(owner) else {
                issues.push(NetworkError::UnknownVariable(cpt.owner.clone()));
                continue;
            };
            if !cpt_seen.insert(owner) {
                issues.push(malformed(owner, CptProblem::Duplicate));
                continue;
            }
            let expected = self.parents_of(owner);
            if expected != cpt.parents {
                issues.push(malformed(
                    owner,
                    CptProblem::ParentMismatch { expected, found: cpt.parents.clone() },
                ));
                continue;
            }
            if cpt.parents.iter().any(|p| !lookup.contains_key(p.as_str())) {
                // already reported as a dangling edge
                continue;
            }
            check_rows(&self.variables, &lookup, oi, cpt, &mut issues);
        }
        for v in &self.variables {
            if !cpt_seen.contains(v.name.as_str())
                && !self.cpts.iter().any(|c| c.owner == v.name)
            {
                issues.push(malformed(&v.name, CptProblem::Missing));
            }
        }
        ValidationReport { issues }
    }
}

fn malformed(owner: &str, problem: CptProblem) -> NetworkError {
    NetworkError::MalformedCpt { owner: owner.to_string(), problem }
}

fn check_rows(
    variables: &[Variable],
    lookup: &HashMap<&str, usize>,
    owner: usize,
    cpt: &CptDoc,
    issues: &mut Vec<NetworkError>,
) {
    let name = variables[owner].name.as_str();
    let card = variables[owner].cardinality();
    let parent_vars: Vec<&Variable> = cpt.parents.iter().map(|p| &variables[lookup[p.as_str()]]).collect();
    let num_rows: usize = parent_vars.iter().map(|v| v.cardinality()).product();
    let mut filled = vec![false; num_rows];
    for row in &cpt.rows {
        let key: Option<usize> = if row.given.len() == parent_vars.len() {
            parent_vars.iter().try_fold(0usize, |acc, v| {
                let label = row.given.get(&v.name)?;
                Some(acc * v.cardinality() + v.state_index(label)?)
            })
        } else {
            None
        };
        let Some(r) = key else {
            issues.push(malformed(name, CptProblem::BadGiven { given: row.given.clone() }));
            continue;
        };
        if filled[r] {
            issues.push(malformed(name, CptProblem::DuplicateRow { given: row.given.clone() }));
            continue;
        }
        filled[r] = true;
        if row.p.len() != card {
            issues.push(malformed(
                name,
                CptProblem::WrongLength { given: row.given.clone(), expected: card, found: row.p.len() },
            ));
            continue;
        }
        let mut in_range = true;
        for (s, &p) in row.p.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                in_range = false;
                issues.push(malformed(
                    name,
                    CptProblem::OutOfRange {
                        given: row.given.clone(),
                        state: variables[owner].states[s].clone(),
                        value: p,
                    },
                ));
            }
        }
        let sum: f64 = row.p.iter().sum();
        if in_range && (sum - 1.0).abs() > SUM_TOLERANCE {
            issues.push(malformed(name, CptProblem::BadSum { given: row.given.clone(), sum }));
        }
    }
    for (r, done) in filled.iter().enumerate() {
        if !done {
            let mut rem = r;
            let mut given = BTreeMap::new();
            for v in parent_vars.iter().rev() {
                given.insert(v.name.clone(), v.states[rem % v.cardinality()].clone());
                rem /= v.cardinality();
            }
            issues.push(malformed(name, CptProblem::RowMissing { given }));
        }
    }
}

/// Kahn's algorithm, ties broken by declaration index. On failure returns
/// one directed cycle (first node repeated at the end).
fn topological_order(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>, Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for &(p, c) in edges {
        indegree[c] += 1;
        children[p].push(c);
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk backwards along in-edges among the remaining nodes until a node repeats.
    let remaining: HashSet<usize> = (0..n).filter(|v| indegree[*v] > 0).collect();
    let start = *remaining.iter().min().expect("a cycle leaves nodes behind");
    let mut path = vec![start];
    let mut pos: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = edges
            .iter()
            .filter(|&&(p, c)| c == cur && remaining.contains(&p))
            .map(|&(p, _)| p)
            .min()
            .expect("remaining nodes keep an in-edge");
        if let Some(&i) = pos.get(&next) {
            let mut cycle: Vec<usize> = path[i..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Err(cycle);
        }
        pos.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

impl Network {
    pub fn from_doc(doc: &NetworkDoc) -> Result<Self, NetworkError> {
        let report = doc.validate();
        if let Some(first) = report.issues.into_iter().next() {
            return Err(first);
        }
        let lookup: HashMap<String, usize> = doc
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let edges: Vec<(usize, usize)> = doc
            .edges
            .iter()
            .map(|(p, c)| (lookup[p], lookup[c]))
            .collect();
        let order = topological_order(doc.variables.len(), &edges).expect("validated acyclic");
        let mut cpts = Vec::with_capacity(doc.variables.len());
        for (i, v) in doc.variables.iter().enumerate() {
            let cdoc = doc.cpts.iter().find(|c| c.owner == v.name).expect("validated total");
            let parents: Vec<usize> = cdoc.parents.iter().map(|p| lookup[p]).collect();
            let parent_cards: Vec<usize> = parents.iter().map(|&p| doc.variables[p].cardinality()).collect();
            let card = v.cardinality();
            let num_rows: usize = parent_cards.iter().product();
            let mut probs = vec![0.0; num_rows * card];
            for row in &cdoc.rows {
                let r = parents.iter().fold(0usize, |acc, &p| {
                    let pv = &doc.variables[p];
                    acc * pv.cardinality() + pv.state_index(&row.given[&pv.name]).expect("validated")
                });
                probs[r * card..(r + 1) * card].copy_from_slice(&row.p);
            }
            cpts.push(Cpt { owner: i, parents, parent_cards, card, probs });
        }
        Ok(Self { variables: doc.variables.clone(), lookup, edges, cpts, order })
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        Self::from_doc(&NetworkDoc::from_json(text)?)
    }

    pub fn to_doc(&self) -> NetworkDoc {
        let cpts = self
            .cpts
            .iter()
            .map(|cpt| CptDoc {
                owner: self.variables[cpt.owner].name.clone(),
                parents: cpt.parents.iter().map(|&p| self.variables[p].name.clone()).collect(),
                rows: (0..cpt.num_rows())
                    .map(|r| CptRowDoc { given: self.row_given(cpt, r), p: cpt.row(r).to_vec() })
                    .collect(),
            })
            .collect();
        NetworkDoc {
            format_version: FORMAT_VERSION,
            variables: self.variables.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(p, c)| (self.variables[p].name.clone(), self.variables[c].name.clone()))
                .collect(),
            cpts,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        self.to_doc().to_json_pretty()
    }

    /// Parent assignment of a CPT row as a label map.
    pub fn row_given(&self, cpt: &Cpt, row: usize) -> BTreeMap<String, String> {
        cpt.parents
            .iter()
            .zip(cpt.row_states(row))
            .map(|(&p, s)| (self.variables[p].name.clone(), self.variables[p].states[s].clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> &Variable {
        &self.variables[index]
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.variables[index].cardinality()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, NetworkError> {
        self.index_of(name).ok_or_else(|| NetworkError::UnknownVariable(name.to_string()))
    }

    pub fn state_of(&self, var: usize, label: &str) -> Result<usize, NetworkError> {
        self.variables[var].state_index(label).ok_or_else(|| NetworkError::UnknownState {
            variable: self.variables[var].name.clone(),
            state: label.to_string(),
        })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn cpt(&self, var: usize) -> &Cpt {
        &self.cpts[var]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.cpts[var].parents
    }

    pub fn children(&self, var: usize) -> Vec<usize> {
        self.edges.iter().filter(|(p, _)| *p == var).map(|&(_, c)| c).collect()
    }

    /// Topological order with ties broken by declaration order.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// True if there is a directed path of length ≥ 1 from `from` to `to`.
    pub fn is_ancestor(&self, from: usize, to: usize) -> bool {
        let mut stack = self.children(from);
        let mut seen = vec![false; self.len()];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(self.children(v));
            }
        }
        false
    }

    /// Converts a labelled assignment into index form.
    pub fn evidence(&self, assignment: &Assignment) -> Result<Evidence, NetworkError> {
        let mut ev = Evidence::empty(self.len());
        for (name, label) in assignment.iter() {
            let v = self.require(name)?;
            ev.set(v, self.state_of(v, label)?);
        }
        Ok(ev)
    }

    pub fn assignment(&self, evidence: &Evidence) -> Assignment {
        evidence
            .observed()
            .map(|(v, s)| (self.variables[v].name.clone(), self.variables[v].states[s].clone()))
            .collect()
    }

    /// A copy with one CPT's probabilities replaced; the result is validated.
    pub fn with_cpt(&self, var: usize, probs: Vec<f64>) -> Result<Network, NetworkError> {
        let mut doc = self.to_doc();
        let cpt = &self.cpts[var];
        let card = cpt.card;
        if probs.len() != cpt.probs.len() {
            return Err(malformed(
                &self.variables[var].name,
                CptProblem::WrongLength { given: BTreeMap::new(), expected: cpt.probs.len(), found: probs.len() },
            ));
        }
        doc.cpts[var].rows = (0..cpt.num_rows())
            .map(|r| CptRowDoc { given: self.row_given(cpt, r), p: probs[r * card..(r + 1) * card].to_vec() })
            .collect();
        Network::from_doc(&doc)
    }

    /// Removes variables that have no children once the removal set is
    /// taken into account. Returns the offending variable if one of them
    /// still has a child outside the set.
    pub fn without_barren(&self, drop: &[usize]) -> Result<Network, usize> {
        let dropset: HashSet<usize> = drop.iter().copied().collect();
        for &v in drop {
            if self.children(v).iter().any(|c| !dropset.contains(c)) {
                return Err(v);
            }
        }
        let mut doc = self.to_doc();
        let names: HashSet<String> = drop.iter().map(|&v| self.variables[v].name.clone()).collect();
        doc.variables.retain(|v| !names.contains(&v.name));
        doc.edges.retain(|(p, c)| !names.contains(p) && !names.contains(c));
        doc.cpts.retain(|c| !names.contains(&c.owner));
        Ok(Network::from_doc(&doc).expect("removing barren nodes keeps a network valid"))
    }

    /// Number of joint assignments over all variables.
    pub fn joint_size(&self) -> usize {
        self.variables.iter().map(Variable::cardinality).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> NetworkDoc {
        NetworkDoc::new()
            .variable("A", ["0", "1"])
            .variable("B", ["0", "1"])
            .edge("A", "B")
            .cpt("A", &[&[0.7, 0.3]])
            .cpt("B", &[&[0.8, 0.2], &[0.1, 0.9]])
    }

    #[test]
    fn two_node_network_orders_topologically() {
        let net = Network::from_doc(&chain()).unwrap();
        assert_eq!(net.topological_order(), &[0, 1]);
        assert_eq!(net.cpt(1).prob(1, 1), 0.9);
    }

    #[test]
    fn reversed_declaration_still_sorts() {
        let doc = NetworkDoc::new()
            .variable("B", ["0", "1"])
            .variable("A", ["0", "1"])
            .edge("A", "B")
            .cpt("B", &[&[0.8, 0.2], &[0.1, 0.9]])
            .cpt("A", &[&[0.7, 0.3]]);
        let net = Network::from_doc(&doc).unwrap();
        assert_eq!(net.topological_order(), &[1, 0]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let doc = NetworkDoc::new()
            .variable("A", ["0", "1"])
            .variable("B", ["0", "1"])
            .edge("B", "A")
            .edge("A", "B")
            .cpt("A", &[&[0.5, 0.5], &[0.5, 0.5]])
            .cpt("B", &[&[0.5, 0.5], &[0.5, 0.5]]);
        match Network::from_doc(&doc) {
            Err(NetworkError::CycleDetected(cycle)) => {
                assert_eq!(cycle.first(), cycle.last());
                assert_eq!(cycle.len(), 3);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn dangling_edge_and_duplicate_name() {
        let doc = chain().edge("A", "Z");
        assert!(matches!(Network::from_doc(&doc), Err(NetworkError::DanglingEdge { .. })));
        let doc = chain().variable("A", ["x", "y"]);
        assert_eq!(Network::from_doc(&doc), Err(NetworkError::DuplicateName("A".into())));
    }

    #[test]
    fn report_cites_bad_sum_with_coordinates() {
        let mut doc = chain();
        doc.cpts[1].rows[1].p = vec![0.07, 0.9];
        let report = doc.validate();
        assert_eq!(report.issues.len(), 1);
        match &report.issues[0] {
            NetworkError::MalformedCpt { owner, problem: CptProblem::BadSum { given, sum } } => {
                assert_eq!(owner, "B");
                assert_eq!(given.get("A").map(String::as_str), Some("1"));
                assert!((sum - 0.97).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn report_cites_out_of_range_entry() {
        let mut doc = chain();
        doc.cpts[0].rows[0].p = vec![1.2, -0.2];
        let report = doc.validate();
        assert!(report.issues.iter().any(|e| matches!(
            e,
            NetworkError::MalformedCpt { problem: CptProblem::OutOfRange { value, .. }, .. } if *value == 1.2
        )));
    }

    #[test]
    fn missing_row_is_reported() {
        let mut doc = chain();
        doc.cpts[1].rows.pop();
        let report = doc.validate();
        assert!(matches!(
            &report.issues[..],
            [NetworkError::MalformedCpt { problem: CptProblem::RowMissing { .. }, .. }]
        ));
    }

    #[test]
    fn valid_network_has_empty_report() {
        assert!(chain().validate().is_valid());
    }

    #[test]
    fn parent_order_must_follow_edges() {
        let mut doc = NetworkDoc::new()
            .variable("A", ["0", "1"])
            .variable("B", ["0", "1"])
            .variable("C", ["0", "1"])
            .edge("A", "C")
            .edge("B", "C")
            .cpt("A", &[&[0.5, 0.5]])
            .cpt("B", &[&[0.5, 0.5]])
            .cpt("C", &[&[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5]]);
        assert!(Network::from_doc(&doc).is_ok());
        doc.cpts[2].parents.reverse();
        assert!(matches!(
            Network::from_doc(&doc),
            Err(NetworkError::MalformedCpt { problem: CptProblem::ParentMismatch { .. }, .. })
        ));
    }

    #[test]
    fn json_round_trip_preserves_network() {
        let net = Network::from_doc(&chain()).unwrap();
        let again = Network::from_json(&net.to_json_pretty()).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn row_index_is_mixed_radix() {
        let doc = NetworkDoc::new()
            .variable("A", ["0", "1", "2"])
            .variable("B", ["0", "1"])
            .variable("C", ["0", "1"])
            .edge("A", "C")
            .edge("B", "C")
            .cpt("A", &[&[0.2, 0.3, 0.5]])
            .cpt("B", &[&[0.5, 0.5]])
            .cpt("C", &[&[1.0, 0.0], &[0.9, 0.1], &[0.8, 0.2], &[0.7, 0.3], &[0.6, 0.4], &[0.5, 0.5]]);
        let net = Network::from_doc(&doc).unwrap();
        let cpt = net.cpt(2);
        assert_eq!(cpt.row_index(&[2, 1]), 5);
        assert_eq!(cpt.row_states(3), vec![1, 1]);
        assert_eq!(cpt.prob(cpt.row_index(&[1, 0]), 1), 0.2);
    }

    #[test]
    fn with_cpt_returns_new_network() {
        let net = Network::from_doc(&chain()).unwrap();
        let edited = net.with_cpt(0, vec![0.4, 0.6]).unwrap();
        assert_eq!(net.cpt(0).prob(0, 1), 0.3);
        assert_eq!(edited.cpt(0).prob(0, 1), 0.6);
        assert!(net.with_cpt(0, vec![0.4, 0.5]).is_err());
    }

    #[test]
    fn barren_removal() {
        let net = Network::from_doc(&chain()).unwrap();
        assert_eq!(net.without_barren(&[0]), Err(0));
        let pruned = net.without_barren(&[1]).unwrap();
        assert_eq!(pruned.len(), 1);
    }
}
