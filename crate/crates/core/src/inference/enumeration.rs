//! Brute-force inference over the full joint. Exponential, used as the
//! reference that the elimination path is checked against.

use super::factor::{increment, Factor};
use crate::network::{Evidence, Network};

/// Product of CPT entries for a complete assignment (one state per variable).
pub fn joint(network: &Network, states: &[usize]) -> f64 {
    network
        .cpts()
        .iter()
        .map(|cpt| {
            let parents: Vec<usize> = cpt.parents().iter().map(|&p| states[p]).collect();
            cpt.prob(cpt.row_index(&parents), states[cpt.owner()])
        })
        .product()
}

/// Calls `f` on every complete assignment consistent with `evidence`.
pub fn for_each_completion(network: &Network, evidence: &Evidence, mut f: impl FnMut(&[usize])) {
    let free: Vec<usize> = (0..network.len()).filter(|&v| evidence.get(v).is_none()).collect();
    let cards: Vec<usize> = free.iter().map(|&v| network.cardinality(v)).collect();
    let mut states: Vec<usize> = (0..network.len()).map(|v| evidence.get(v).unwrap_or(0)).collect();
    let mut digits = vec![0usize; free.len()];
    let total: usize = cards.iter().product();
    for _ in 0..total {
        for (&v, &d) in free.iter().zip(&digits) {
            states[v] = d;
        }
        f(&states);
        increment(&mut digits, &cards);
    }
}

/// Probability of a partial assignment.
pub fn marginal(network: &Network, evidence: &Evidence) -> f64 {
    let mut total = 0.0;
    for_each_completion(network, evidence, |s| total += joint(network, s));
    total
}

/// Unnormalized table over `keep` (in the given order) of the joint
/// restricted to `evidence`.
pub fn table(network: &Network, keep: &[usize], evidence: &Evidence) -> Factor {
    let cards: Vec<usize> = keep.iter().map(|&v| network.cardinality(v)).collect();
    let mut values = vec![0.0; cards.iter().product()];
    for_each_completion(network, evidence, |s| {
        let idx = keep.iter().zip(&cards).fold(0, |acc, (&v, &c)| acc * c + s[v]);
        values[idx] += joint(network, s);
    });
    Factor::new(keep.to_vec(), cards, values)
}
