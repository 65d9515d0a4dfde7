use std::collections::HashMap;
use std::io;

use serde::{Deserialize, Serialize};

use super::elimination::eliminate_indexed;
use super::factor::increment;
use super::InferenceError;
use crate::network::{Assignment, Evidence, Network};
use crate::roles::FeoScenario;

/// One probability P(q | j, s), or P(q | j) when `sensitive` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub justified: Vec<String>,
    pub sensitive: Option<Vec<String>>,
    pub target: String,
    pub probability: f64,
}

/// Target conditionals for every justified/sensitive assignment, plus the
/// anchor rows conditioned on the justified variables alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub justified_variables: Vec<String>,
    pub sensitive_variables: Vec<String>,
    pub target_variable: String,
    pub target_states: Vec<String>,
    pub rows: Vec<ConditionalRow>,
}

impl ConditionalTable {
    pub fn probability(&self, justified: &[&str], sensitive: Option<&[&str]>, target: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.target == target
                    && r.justified.iter().eq(justified.iter())
                    && match (&r.sensitive, sensitive) {
                        (None, None) => true,
                        (Some(a), Some(b)) => a.iter().eq(b.iter()),
                        _ => false,
                    }
            })
            .map(|r| r.probability)
    }

    /// Largest |P(q|j,s) − P(q|j)| over all rows.
    pub fn deviation(&self) -> f64 {
        let anchors: HashMap<(&[String], &str), f64> = self
            .rows
            .iter()
            .filter(|r| r.sensitive.is_none())
            .map(|r| ((r.justified.as_slice(), r.target.as_str()), r.probability))
            .collect();
        self.rows
            .iter()
            .filter(|r| r.sensitive.is_some())
            .map(|r| (r.probability - anchors[&(r.justified.as_slice(), r.target.as_str())]).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with one column per justified and sensitive variable, the target
    /// state and the probability. Anchor rows carry `*` in the sensitive columns.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = self
            .justified_variables
            .iter()
            .chain(&self.sensitive_variables)
            .map(String::as_str)
            .chain([self.target_variable.as_str(), "probability"])
            .collect();
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.justified.clone();
            match &row.sensitive {
                Some(s) => rec.extend(s.iter().cloned()),
                None => rec.extend(std::iter::repeat_n("*".to_string(), self.sensitive_variables.len())),
            }
            rec.push(row.target.clone());
            rec.push(format!("{}", row.probability));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("labels are utf-8")
    }
}

/// Joint table over J ++ S ++ [Q], in that scope order.
pub(crate) fn feo_joint(network: &Network, justified: &[usize], sensitive: &[usize], target: usize) -> super::Factor {
    let keep: Vec<usize> = justified.iter().chain(sensitive).copied().chain([target]).collect();
    eliminate_indexed(network, &keep, &Evidence::empty(network.len()), None)
}

/// All joint states of `vars` in mixed-radix order, first variable most significant.
pub(crate) fn assignments_of(network: &Network, vars: &[usize]) -> Vec<Vec<usize>> {
    let cards: Vec<usize> = vars.iter().map(|&v| network.cardinality(v)).collect();
    let total: usize = cards.iter().product();
    let mut digits = vec![0usize; vars.len()];
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        out.push(digits.clone());
        increment(&mut digits, &cards);
    }
    out
}

fn labels(network: &Network, vars: &[usize], states: &[usize]) -> Vec<String> {
    vars.iter().zip(states).map(|(&v, &s)| network.variable(v).states[s].clone()).collect()
}

fn zero_cell(network: &Network, vars: &[usize], states: &[usize]) -> InferenceError {
    let a: Assignment = vars
        .iter()
        .zip(states)
        .map(|(&v, &s)| (network.variable(v).name.clone(), network.variable(v).states[s].clone()))
        .collect();
    InferenceError::ZeroEvidenceProbability(a)
}

pub fn feo_table(scenario: &FeoScenario) -> Result<ConditionalTable, InferenceError> {
    let net = scenario.network();
    let (jv, sv, q) = (scenario.justified(), scenario.sensitive(), scenario.target());
    let joint = feo_joint(net, jv, sv, q);
    let qcard = net.cardinality(q);
    let js_vars: Vec<usize> = jv.iter().chain(sv).copied().collect();
    let mut rows = Vec::new();
    for j in assignments_of(net, jv) {
        let mut anchor = vec![0.0; qcard];
        let mut group = Vec::new();
        for s in assignments_of(net, sv) {
            let mut cell: Vec<usize> = j.iter().chain(&s).copied().collect();
            let pq: Vec<f64> = (0..qcard)
                .map(|qs| {
                    cell.push(qs);
                    let v = joint.value(&cell);
                    cell.pop();
                    v
                })
                .collect();
            let pjs: f64 = pq.iter().sum();
            if pjs <= 0.0 {
                return Err(zero_cell(net, &js_vars, &cell));
            }
            for (a, p) in anchor.iter_mut().zip(&pq) {
                *a += p;
            }
            for (qs, p) in pq.iter().enumerate() {
                group.push(ConditionalRow {
                    justified: labels(net, jv, &j),
                    sensitive: Some(labels(net, sv, &s)),
                    target: net.variable(q).states[qs].clone(),
                    probability: p / pjs,
                });
            }
        }
        let pj: f64 = anchor.iter().sum();
        rows.extend(group);
        for (qs, p) in anchor.iter().enumerate() {
            rows.push(ConditionalRow {
                justified: labels(net, jv, &j),
                sensitive: None,
                target: net.variable(q).states[qs].clone(),
                probability: p / pj,
            });
        }
    }
    Ok(ConditionalTable {
        justified_variables: jv.iter().map(|&v| net.variable(v).name.clone()).collect(),
        sensitive_variables: sv.iter().map(|&v| net.variable(v).name.clone()).collect(),
        target_variable: net.variable(q).name.clone(),
        target_states: net.variable(q).states.clone(),
        rows,
    })
}

/// Max over (j, s, q) of |P(q|j,s) − P(q|j)|; zero exactly when the target
/// is independent of the sensitive variables given the justified ones.
pub fn feo_deviation(scenario: &FeoScenario) -> Result<f64, InferenceError> {
    Ok(feo_table(scenario)?.deviation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkDoc;
    use crate::roles::{assign_roles, RoleAssignment};

    fn roles(j: &[&str], s: &[&str], other: &[&str], c: &str, q: &str) -> RoleAssignment {
        let set = |x: &[&str]| x.iter().map(|v| v.to_string()).collect();
        RoleAssignment {
            justified: set(j),
            sensitive: set(s),
            other: set(other),
            ignored: Default::default(),
            control: c.into(),
            target: q.into(),
        }
    }

    fn mini() -> FeoScenario {
        let doc = NetworkDoc::new()
            .variable("T", ["0", "1"])
            .variable("S", ["0", "1"])
            .variable("C", ["0", "1"])
            .variable("Q", ["0", "1"])
            .edge("S", "C")
            .edge("T", "Q")
            .edge("C", "Q")
            .cpt("T", &[&[0.5, 0.5]])
            .cpt("S", &[&[0.5, 0.5]])
            .cpt("C", &[&[0.7, 0.3], &[0.2, 0.8]])
            .cpt("Q", &[&[0.8, 0.2], &[0.4, 0.6], &[0.6, 0.4], &[0.1, 0.9]]);
        let net = Network::from_doc(&doc).unwrap();
        assign_roles(&net, &roles(&["T"], &["S"], &["C", "Q"], "C", "Q"), None).unwrap()
    }

    #[test]
    fn mini_table_matches_closed_form() {
        let t = feo_table(&mini()).unwrap();
        // P(Q=1|t,s) = P(Q=1|t,C=0)(1−x_s) + P(Q=1|t,C=1)x_s with x = (0.3, 0.8)
        let cases = [("0", "0", 0.2 * 0.7 + 0.6 * 0.3), ("0", "1", 0.2 * 0.2 + 0.6 * 0.8), ("1", "0", 0.4 * 0.7 + 0.9 * 0.3), ("1", "1", 0.4 * 0.2 + 0.9 * 0.8)];
        for (tv, sv, p) in cases {
            let got = t.probability(&[tv], Some(&[sv]), "1").unwrap();
            assert!((got - p).abs() < 1e-12, "{tv}{sv}: {got} vs {p}");
        }
        let anchor = t.probability(&["0"], None, "1").unwrap();
        assert!((anchor - (cases[0].2 + cases[1].2) / 2.0).abs() < 1e-12);
        // T=1 gap: |0.80 − 0.675|
        assert!((t.deviation() - 0.125).abs() < 1e-12);
        assert_eq!(t.rows.len(), 2 * (2 + 1) * 2);
    }

    #[test]
    fn row_groups_sum_to_one() {
        let t = feo_table(&mini()).unwrap();
        for chunk in t.rows.chunks(2) {
            let total: f64 = chunk.iter().map(|r| r.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disconnected_sensitive_gives_zero_deviation() {
        let doc = NetworkDoc::new()
            .variable("J", ["a", "b"])
            .variable("S", ["x", "y"])
            .variable("C", ["0", "1"])
            .variable("Q", ["0", "1", "2"])
            .edge("J", "C")
            .edge("C", "Q")
            .edge("J", "Q")
            .cpt("J", &[&[0.4, 0.6]])
            .cpt("S", &[&[0.3, 0.7]])
            .cpt("C", &[&[0.5, 0.5], &[0.1, 0.9]])
            .cpt("Q", &[&[0.2, 0.3, 0.5], &[0.6, 0.2, 0.2], &[0.1, 0.1, 0.8], &[0.3, 0.3, 0.4]]);
        let net = Network::from_doc(&doc).unwrap();
        let sc = assign_roles(&net, &roles(&["J"], &["S"], &["C", "Q"], "C", "Q"), None).unwrap();
        assert!(feo_deviation(&sc).unwrap() < 1e-12);
    }

    #[test]
    fn csv_marks_anchor_rows() {
        let csv = feo_table(&mini()).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "T,S,Q,probability");
        assert_eq!(lines.len(), 13);
        assert!(lines[5].starts_with("0,*,0,"));
    }
}
