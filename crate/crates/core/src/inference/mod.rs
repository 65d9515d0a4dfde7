//! Exact inference: joint, marginal and conditional probabilities computed
//! by variable elimination, with brute-force enumeration kept as an oracle.

mod elimination;
pub mod enumeration;
mod factor;
pub(crate) mod feo;

use thiserror::Error;

use crate::network::{Assignment, Evidence, Network, NetworkError};

pub(crate) use elimination::eliminate_indexed;
pub use factor::Factor;
pub use feo::{feo_deviation, feo_table, ConditionalRow, ConditionalTable};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("assignment does not cover {}", .0.join(", "))]
    IncompleteAssignment(Vec<String>),
    #[error("evidence has zero probability: {0}")]
    ZeroEvidenceProbability(Assignment),
    #[error("variable {0} is both kept and observed")]
    KeepEvidenceOverlap(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl InferenceError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::IncompleteAssignment(_) => "IncompleteAssignment",
            Self::ZeroEvidenceProbability(_) => "ZeroEvidenceProbability",
            Self::KeepEvidenceOverlap(_) => "KeepEvidenceOverlap",
            Self::Network(e) => e.kind(),
        }
    }
}

/// Probability of a full assignment: the product of one entry per CPT.
pub fn joint_probability(network: &Network, full: &Assignment) -> Result<f64, InferenceError> {
    let ev = network.evidence(full)?;
    if !ev.is_full() {
        let missing = (0..network.len())
            .filter(|&v| ev.get(v).is_none())
            .map(|v| network.variable(v).name.clone())
            .collect();
        return Err(InferenceError::IncompleteAssignment(missing));
    }
    let states: Vec<usize> = (0..network.len()).map(|v| ev.get(v).unwrap_or_default()).collect();
    Ok(enumeration::joint(network, &states))
}

/// Probability of a partial assignment.
pub fn marginal(network: &Network, query: &Assignment) -> Result<f64, InferenceError> {
    Ok(probability_of(network, &network.evidence(query)?))
}

/// P(target | evidence). Targets that contradict the evidence have probability 0.
pub fn conditional(network: &Network, target: &Assignment, evidence: &Assignment) -> Result<f64, InferenceError> {
    let ev = network.evidence(evidence)?;
    let tv = network.evidence(target)?;
    let denom = probability_of(network, &ev);
    if denom <= 0.0 {
        return Err(InferenceError::ZeroEvidenceProbability(evidence.clone()));
    }
    Ok(match ev.merge(&tv) {
        Some(joint) => probability_of(network, &joint) / denom,
        None => 0.0,
    })
}

/// Factor over `keep` proportional to the joint restricted to `evidence`,
/// with every other variable summed out. Its total is P(evidence).
pub fn eliminate(network: &Network, keep: &[&str], evidence: &Assignment) -> Result<Factor, InferenceError> {
    let ev = network.evidence(evidence)?;
    let keep = keep.iter().map(|k| network.require(k)).collect::<Result<Vec<_>, _>>()?;
    if let Some(&v) = keep.iter().find(|&&v| ev.get(v).is_some()) {
        return Err(InferenceError::KeepEvidenceOverlap(network.variable(v).name.clone()));
    }
    Ok(eliminate_indexed(network, &keep, &ev, None))
}

/// Probability of index-form evidence via elimination.
pub fn probability_of(network: &Network, evidence: &Evidence) -> f64 {
    eliminate_indexed(network, &[], evidence, None).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkDoc;

    fn chain() -> Network {
        Network::from_doc(
            &NetworkDoc::new()
                .variable("A", ["0", "1"])
                .variable("B", ["0", "1"])
                .edge("A", "B")
                .cpt("A", &[&[0.7, 0.3]])
                .cpt("B", &[&[0.8, 0.2], &[0.1, 0.9]]),
        )
        .unwrap()
    }

    #[test]
    fn independent_uniform_joint() {
        let doc = ["X", "Y", "Z"]
            .iter()
            .fold(NetworkDoc::new(), |d, v| d.variable(v, ["0", "1"]).cpt(v, &[&[0.5, 0.5]]));
        let net = Network::from_doc(&doc).unwrap();
        let a = Assignment::new().with("X", "1").with("Y", "0").with("Z", "1");
        assert!((joint_probability(&net, &a).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn chain_joint_and_marginals() {
        let net = chain();
        let a = Assignment::new().with("A", "1").with("B", "1");
        assert!((joint_probability(&net, &a).unwrap() - 0.27).abs() < 1e-15);
        assert!((marginal(&net, &Assignment::new()).unwrap() - 1.0).abs() < 1e-15);
        assert!((marginal(&net, &Assignment::new().with("A", "1")).unwrap() - 0.3).abs() < 1e-15);
        // P(B=1) = 0.7*0.2 + 0.3*0.9
        assert!((marginal(&net, &Assignment::new().with("B", "1")).unwrap() - 0.41).abs() < 1e-15);
    }

    #[test]
    fn incomplete_assignment_is_rejected() {
        let err = joint_probability(&chain(), &Assignment::new().with("A", "1")).unwrap_err();
        assert!(matches!(err, InferenceError::IncompleteAssignment(ref m) if m == &["B".to_string()]));
    }

    #[test]
    fn conditional_with_empty_evidence_is_marginal() {
        let net = chain();
        let q = Assignment::new().with("B", "1");
        assert_eq!(conditional(&net, &q, &Assignment::new()).unwrap(), marginal(&net, &q).unwrap());
        let back = conditional(&net, &Assignment::new().with("A", "1"), &q).unwrap();
        assert!((back - 0.27 / 0.41).abs() < 1e-14);
    }

    #[test]
    fn zero_evidence_is_an_error() {
        let net = Network::from_doc(
            &NetworkDoc::new().variable("A", ["0", "1"]).cpt("A", &[&[1.0, 0.0]]),
        )
        .unwrap();
        let err = conditional(&net, &Assignment::new(), &Assignment::new().with("A", "1")).unwrap_err();
        assert_eq!(err.kind(), "ZeroEvidenceProbability");
    }

    #[test]
    fn contradicting_target_has_zero_probability() {
        let net = chain();
        let p = conditional(&net, &Assignment::new().with("A", "0"), &Assignment::new().with("A", "1")).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn eliminate_everything_kept_is_the_joint() {
        let net = chain();
        let f = eliminate(&net, &["A", "B"], &Assignment::new()).unwrap();
        let expected = [0.56, 0.14, 0.03, 0.27];
        for (a, b) in f.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let reversed = eliminate(&net, &["B", "A"], &Assignment::new()).unwrap();
        assert!((reversed.value(&[1, 0]) - 0.14).abs() < 1e-15);
    }

    #[test]
    fn eliminate_rejects_overlap() {
        let err = eliminate(&chain(), &["A"], &Assignment::new().with("A", "0")).unwrap_err();
        assert!(matches!(err, InferenceError::KeepEvidenceOverlap(_)));
    }
}
