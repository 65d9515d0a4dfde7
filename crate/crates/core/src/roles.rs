//! Role assignment for fair-equality-of-opportunity scenarios: which
//! variables are justified, sensitive or other, which one is edited (the
//! control) and which one is the advantageous position (the target).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub justified: Vec<String>,
    pub sensitive: Vec<String>,
    pub other: Vec<String>,
    #[serde(default)]
    pub ignored: Vec<String>,
    pub control: String,
    pub target: String,
}

/// One editable coordinate of the control variable's CPT. Omitting `state`
/// marks the whole row as editable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeEntryDoc {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

/// The role document: a [`RoleAssignment`] plus optional free entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolesDoc {
    pub format_version: u32,
    #[serde(flatten)]
    pub roles: RoleAssignment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_entries: Option<Vec<FreeEntryDoc>>,
}

impl RolesDoc {
    pub fn from_json(text: &str) -> Result<Self, RoleError> {
        let doc: RolesDoc = serde_json::from_str(text).map_err(|e| RoleError::Parse(e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(RoleError::UnsupportedVersion(doc.format_version));
        }
        Ok(doc)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("role documents always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoleError {
    #[error("cannot parse role document: {0}")]
    Parse(String),
    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),
    #[error("role document names unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` appears in both `{first}` and `{second}`")]
    RoleOverlap { variable: String, first: &'static str, second: &'static str },
    #[error("variable `{0}` is not assigned any role")]
    Uncovered(String),
    #[error("control variable `{0}` is listed as sensitive")]
    ControlIsSensitive(String),
    #[error("control variable `{0}` must belong to the other set")]
    ControlNotOther(String),
    #[error("target variable `{0}` is not an other variable of the network")]
    TargetMissing(String),
    #[error("control and target are both `{0}`")]
    ControlIsTarget(String),
    #[error("the {0} set is empty")]
    EmptyRole(&'static str),
    #[error("free entry {given:?} / {state:?} does not exist in the control CPT")]
    UnknownFreeEntry { given: BTreeMap<String, String>, state: Option<String> },
    #[error("ignored variable `{variable}` still feeds `{child}`")]
    IgnoredHasChildren { variable: String, child: String },
    #[error("control variable `{control}` is an ancestor of conditioning variable `{variable}`")]
    ControlAffectsConditioning { control: String, variable: String },
}

impl RoleError {
    pub fn kind(&self) -> &'static str {
        match self {
            RoleError::Parse(_) => "Parse",
            RoleError::UnsupportedVersion(_) => "UnsupportedVersion",
            RoleError::UnknownVariable(_) => "UnknownVariable",
            RoleError::RoleOverlap { .. } => "RoleOverlap",
            RoleError::Uncovered(_) => "Uncovered",
            RoleError::ControlIsSensitive(_) => "ControlIsSensitive",
            RoleError::ControlNotOther(_) => "ControlNotOther",
            RoleError::TargetMissing(_) => "TargetMissing",
            RoleError::ControlIsTarget(_) => "ControlIsTarget",
            RoleError::EmptyRole(_) => "EmptyRole",
            RoleError::UnknownFreeEntry { .. } => "UnknownFreeEntry",
            RoleError::IgnoredHasChildren { .. } => "IgnoredHasChildren",
            RoleError::ControlAffectsConditioning { .. } => "ControlAffectsConditioning",
        }
    }
}

/// A network together with validated roles and the editable entries of the
/// control variable's CPT.
#[derive(Debug, Clone, PartialEq)]
pub struct FeoScenario {
    network: Network,
    roles: RoleAssignment,
    justified: Vec<usize>,
    sensitive: Vec<usize>,
    control: usize,
    target: usize,
    free: Vec<bool>,
}

impl FeoScenario {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn roles(&self) -> &RoleAssignment {
        &self.roles
    }

    /// Justified variables in network declaration order.
    pub fn justified(&self) -> &[usize] {
        &self.justified
    }

    /// Sensitive variables in network declaration order.
    pub fn sensitive(&self) -> &[usize] {
        &self.sensitive
    }

    pub fn control(&self) -> usize {
        self.control
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Editable flags over the control CPT, row-major like [`crate::network::Cpt`].
    pub fn free_mask(&self) -> &[bool] {
        &self.free
    }

    pub fn is_free(&self, row: usize, state: usize) -> bool {
        self.free[row * self.network.cardinality(self.control) + state]
    }

    /// Same roles and free entries over a network that differs only in CPT
    /// values (for example, after a solve).
    pub fn with_network(&self, network: Network) -> FeoScenario {
        debug_assert_eq!(network.variables(), self.network.variables());
        FeoScenario { network, ..self.clone() }
    }

    /// Free entries as a document, suitable for a role file.
    pub fn free_entries_doc(&self) -> Vec<FreeEntryDoc> {
        let cpt = self.network.cpt(self.control);
        let k = cpt.cardinality();
        let var = self.network.variable(self.control);
        let mut out = Vec::new();
        for row in 0..cpt.num_rows() {
            for s in 0..k {
                if self.free[row * k + s] {
                    out.push(FreeEntryDoc {
                        given: self.network.row_given(cpt, row),
                        state: Some(var.states[s].clone()),
                    });
                }
            }
        }
        out
    }
}

const ROLE_NAMES: [&str; 4] = ["justified", "sensitive", "other", "ignored"];

/// Validates `roles` against `network`, drops ignored variables and resolves
/// the free entries (all of the control CPT when `free_entries` is `None`).
pub fn assign_roles(
    network: &Network,
    roles: &RoleAssignment,
    free_entries: Option<&[FreeEntryDoc]>,
) -> Result<FeoScenario, RoleError> {
    if roles.control == roles.target {
        return Err(RoleError::ControlIsTarget(roles.control.clone()));
    }
    if roles.sensitive.contains(&roles.control) {
        return Err(RoleError::ControlIsSensitive(roles.control.clone()));
    }
    if network.index_of(&roles.target).is_none() || !roles.other.contains(&roles.target) {
        return Err(RoleError::TargetMissing(roles.target.clone()));
    }
    if !roles.other.contains(&roles.control) {
        return Err(RoleError::ControlNotOther(roles.control.clone()));
    }

    let sets = [&roles.justified, &roles.sensitive, &roles.other, &roles.ignored];
    let mut role_of: HashMap<&str, usize> = HashMap::new();
    for (r, set) in sets.iter().enumerate() {
        for name in set.iter() {
            if network.index_of(name).is_none() {
                return Err(RoleError::UnknownVariable(name.clone()));
            }
            if let Some(prev) = role_of.insert(name.as_str(), r) {
                return Err(RoleError::RoleOverlap {
                    variable: name.clone(),
                    first: ROLE_NAMES[prev],
                    second: ROLE_NAMES[r],
                });
            }
        }
    }
    for v in network.variables() {
        if !role_of.contains_key(v.name.as_str()) {
            return Err(RoleError::Uncovered(v.name.clone()));
        }
    }
    if roles.justified.is_empty() {
        return Err(RoleError::EmptyRole("justified"));
    }
    if roles.sensitive.is_empty() {
        return Err(RoleError::EmptyRole("sensitive"));
    }

    let ignored: Vec<usize> = roles.ignored.iter().filter_map(|n| network.index_of(n)).collect();
    let network = if ignored.is_empty() {
        network.clone()
    } else {
        network.without_barren(&ignored).map_err(|v| {
            let child = network
                .children(v)
                .into_iter()
                .find(|c| !ignored.contains(c))
                .map(|c| network.variable(c).name.clone())
                .unwrap_or_default();
            RoleError::IgnoredHasChildren { variable: network.variable(v).name.clone(), child }
        })?
    };

    let resolve = |names: &[String]| -> Vec<usize> {
        let mut idx: Vec<usize> = names.iter().filter_map(|n| network.index_of(n)).collect();
        idx.sort_unstable();
        idx
    };
    let justified = resolve(&roles.justified);
    let sensitive = resolve(&roles.sensitive);
    let control = network.index_of(&roles.control).expect("checked above");
    let target = network.index_of(&roles.target).expect("checked above");

    for &v in justified.iter().chain(&sensitive) {
        if network.is_ancestor(control, v) {
            return Err(RoleError::ControlAffectsConditioning {
                control: roles.control.clone(),
                variable: network.variable(v).name.clone(),
            });
        }
    }

    let cpt = network.cpt(control);
    let k = cpt.cardinality();
    let free = match free_entries {
        None => vec![true; cpt.num_rows() * k],
        Some(entries) => {
            let mut mask = vec![false; cpt.num_rows() * k];
            for entry in entries {
                let unknown = || RoleError::UnknownFreeEntry {
                    given: entry.given.clone(),
                    state: entry.state.clone(),
                };
                if entry.given.len() != cpt.parents().len() {
                    return Err(unknown());
                }
                let mut parent_states = Vec::with_capacity(cpt.parents().len());
                for &p in cpt.parents() {
                    let label = entry.given.get(&network.variable(p).name).ok_or_else(unknown)?;
                    parent_states.push(network.variable(p).state_index(label).ok_or_else(unknown)?);
                }
                let row = cpt.row_index(&parent_states);
                match &entry.state {
                    Some(label) => {
                        let s = network.variable(control).state_index(label).ok_or_else(unknown)?;
                        mask[row * k + s] = true;
                    }
                    None => mask[row * k..(row + 1) * k].iter_mut().for_each(|m| *m = true),
                }
            }
            mask
        }
    };

    Ok(FeoScenario {
        network,
        roles: roles.clone(),
        justified,
        sensitive,
        control,
        target,
        free,
    })
}

/// Parses and applies a role document.
pub fn scenario_from_docs(network: &Network, doc: &RolesDoc) -> Result<FeoScenario, RoleError> {
    assign_roles(network, &doc.roles, doc.free_entries.as_deref())
}
