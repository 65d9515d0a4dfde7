use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::LearningError;
use crate::network::{CptDoc, CptRowDoc, Network, NetworkDoc, Variable, FORMAT_VERSION};

/// Variables and edges of a network whose CPTs are to be learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureDoc {
    pub format_version: u32,
    pub variables: Vec<Variable>,
    pub edges: Vec<(String, String)>,
}

impl StructureDoc {
    pub fn from_json(text: &str) -> Result<Self, LearningError> {
        let doc: StructureDoc = serde_json::from_str(text).map_err(|e| LearningError::Parse(e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(LearningError::Parse(format!("unsupported format_version {}", doc.format_version)));
        }
        Ok(doc)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serializes")
    }

    /// The structure of an existing network.
    pub fn of(network: &Network) -> Self {
        let doc = network.to_doc();
        Self { format_version: FORMAT_VERSION, variables: doc.variables, edges: doc.edges }
    }
}

/// Parent assignment that never occurred in the data (only possible with
/// zero smoothing); its row was set to uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnseenRow {
    pub variable: String,
    pub given: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub rows_used: usize,
    pub smoothing: f64,
    pub unseen: Vec<UnseenRow>,
}

/// Maximum-likelihood CPTs with additive smoothing:
/// P(v | u) = (n(v, u) + α) / (n(u) + α·|V|).
pub fn fit_parameters(structure: &StructureDoc, data: &Dataset, smoothing: f64) -> Result<(Network, FitReport), LearningError> {
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(LearningError::InvalidSmoothing(smoothing));
    }
    if data.is_empty() {
        return Err(LearningError::EmptyDataset);
    }
    let vars = &structure.variables;
    let column_of: Vec<usize> = vars
        .iter()
        .map(|v| data.column_index(&v.name).ok_or_else(|| LearningError::MissingColumn(v.name.clone())))
        .collect::<Result<_, _>>()?;
    // state index per (record, variable)
    let mut coded = vec![vec![0usize; vars.len()]; data.len()];
    for (vi, (v, &ci)) in vars.iter().zip(&column_of).enumerate() {
        for (r, record) in data.records().iter().enumerate() {
            coded[r][vi] = v.state_index(&record[ci]).ok_or_else(|| LearningError::StateMismatch {
                variable: v.name.clone(),
                label: record[ci].clone(),
                declared: v.states.clone(),
            })?;
        }
    }
    let index_of = |name: &str| vars.iter().position(|v| v.name == name);
    let mut doc = NetworkDoc { format_version: FORMAT_VERSION, variables: vars.clone(), edges: structure.edges.clone(), cpts: Vec::new() };
    let mut unseen = Vec::new();
    for (vi, v) in vars.iter().enumerate() {
        let parent_names: Vec<String> = structure.edges.iter().filter(|(_, c)| *c == v.name).map(|(p, _)| p.clone()).collect();
        let parents: Vec<usize> = parent_names
            .iter()
            .map(|p| index_of(p).ok_or_else(|| LearningError::MissingColumn(p.clone())))
            .collect::<Result<_, _>>()?;
        let cards: Vec<usize> = parents.iter().map(|&p| vars[p].cardinality()).collect();
        let k = v.cardinality();
        let rows: usize = cards.iter().product();
        let mut counts = vec![0usize; rows * k];
        for rec in &coded {
            let row = parents.iter().zip(&cards).fold(0, |acc, (&p, &c)| acc * c + rec[p]);
            counts[row * k + rec[vi]] += 1;
        }
        let mut cpt_rows = Vec::with_capacity(rows);
        for row in 0..rows {
            let mut rem = row;
            let mut states = vec![0usize; parents.len()];
            for (slot, &c) in states.iter_mut().zip(&cards).rev() {
                *slot = rem % c;
                rem /= c;
            }
            let given: BTreeMap<String, String> = parents
                .iter()
                .zip(&states)
                .map(|(&p, &s)| (vars[p].name.clone(), vars[p].states[s].clone()))
                .collect();
            let slice = &counts[row * k..(row + 1) * k];
            let total = slice.iter().sum::<usize>() as f64 + smoothing * k as f64;
            let p: Vec<f64> = if total > 0.0 {
                let mut p: Vec<f64> = slice.iter().map(|&n| (n as f64 + smoothing) / total).collect();
                // make the row sum to exactly one
                let drift = 1.0 - p.iter().sum::<f64>();
                let last = p.len() - 1;
                p[last] += drift;
                p
            } else {
                unseen.push(UnseenRow { variable: v.name.clone(), given: given.clone() });
                vec![1.0 / k as f64; k]
            };
            cpt_rows.push(CptRowDoc { given, p });
        }
        doc.cpts.push(CptDoc { owner: v.name.clone(), parents: parent_names, rows: cpt_rows });
    }
    let network = Network::from_doc(&doc)?;
    Ok((network, FitReport { rows_used: data.len(), smoothing, unseen }))
}
