use super::factor::Factor;
use crate::network::{Evidence, Network};

/// Sums the evidence-restricted joint over every variable outside `keep`.
///
/// The result has scope `keep` in the given order and is unnormalized:
/// its total is the probability of the evidence. When `skip` names a
/// variable, that variable's CPT factor is left out of the product.
pub(crate) fn eliminate_indexed(network: &Network, keep: &[usize], evidence: &Evidence, skip: Option<usize>) -> Factor {
    let n = network.len();
    let relevant = relevant_variables(network, keep, evidence, skip);
    let mut factors: Vec<Factor> = (0..n)
        .filter(|&v| relevant[v] && Some(v) != skip)
        .map(|v| Factor::from_cpt(network.cpt(v), evidence))
        .collect();
    let mut pending: Vec<usize> = (0..n)
        .filter(|&v| relevant[v] && !keep.contains(&v) && evidence.get(v).is_none())
        .collect();

    while !pending.is_empty() {
        let (pos, var) = pick_min_degree(&pending, &factors, n);
        pending.remove(pos);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.scope().contains(&var));
        factors = rest;
        if let Some(product) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(product.sum_out(var));
        }
    }

    let mut result = factors.into_iter().fold(Factor::scalar(1.0), |a, b| a.product(&b));
    for &k in keep {
        result = result.broadcast(k, network.cardinality(k));
    }
    result.reorder(keep)
}

/// Ancestral closure of the query, evidence and skipped variables. Every
/// other variable is barren and its factors sum to one.
fn relevant_variables(network: &Network, keep: &[usize], evidence: &Evidence, skip: Option<usize>) -> Vec<bool> {
    let mut relevant = vec![false; network.len()];
    let mut stack: Vec<usize> = keep.iter().copied().chain(evidence.observed().map(|(v, _)| v)).chain(skip).collect();
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut relevant[v], true) {
            stack.extend_from_slice(network.parents(v));
        }
    }
    relevant
}

/// Variable with the fewest neighbours in the current interaction graph;
/// ties go to the lowest index.
fn pick_min_degree(pending: &[usize], factors: &[Factor], n: usize) -> (usize, usize) {
    let mut best = (usize::MAX, 0, 0);
    let mut mark = vec![false; n];
    for (pos, &var) in pending.iter().enumerate() {
        mark.iter_mut().for_each(|m| *m = false);
        let mut degree = 0;
        for f in factors.iter().filter(|f| f.scope().contains(&var)) {
            for &u in f.scope() {
                if u != var && !std::mem::replace(&mut mark[u], true) {
                    degree += 1;
                }
            }
        }
        if (degree, var) < (best.0, best.2) {
            best = (degree, pos, var);
        }
    }
    (best.1, best.2)
}
