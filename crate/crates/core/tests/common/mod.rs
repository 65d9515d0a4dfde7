#![allow(dead_code)]

use feo_core::network::{Network, NetworkDoc};
use feo_core::roles::{assign_roles, FeoScenario, RoleAssignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random DAG over `n` variables (2..=max_states states each), edges only
/// from lower to higher index, with random CPTs that include zeros now and then.
pub fn random_network(seed: u64, n: usize, max_states: usize, max_parents: usize) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_states)).collect();
    let mut doc = NetworkDoc::new();
    for (name, &k) in names.iter().zip(&cards) {
        doc = doc.variable(name, (0..k).map(|s| format!("s{s}")));
    }
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (child, ps) in parents.iter_mut().enumerate() {
        for p in 0..child {
            if ps.len() < max_parents && rng.gen_bool(0.45) {
                ps.push(p);
            }
        }
    }
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            doc = doc.edge(&names[p], &names[child]);
        }
    }
    for (v, ps) in parents.iter().enumerate() {
        let rows: usize = ps.iter().map(|&p| cards[p]).product();
        let table: Vec<Vec<f64>> = (0..rows).map(|_| random_row(&mut rng, cards[v])).collect();
        let refs: Vec<&[f64]> = table.iter().map(Vec::as_slice).collect();
        doc = doc.cpt(&names[v], &refs);
    }
    Network::from_doc(&doc).expect("generated network is valid")
}

pub fn random_row(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    // exact normalization through the last nonzero entry
    let drift = 1.0 - w.iter().sum::<f64>();
    let last = w.iter().rposition(|&x| x > 0.0).unwrap();
    w[last] += drift;
    w
}

pub fn roles(j: &[&str], s: &[&str], other: &[&str], c: &str, q: &str) -> RoleAssignment {
    let set = |x: &[&str]| x.iter().map(|v| v.to_string()).collect();
    RoleAssignment {
        justified: set(j),
        sensitive: set(s),
        other: set(other),
        ignored: Vec::new(),
        control: c.into(),
        target: q.into(),
    }
}

/// Mini fixture variant with an extra S→Q edge: for S=1 the probability of
/// Q=1 is shifted up by 0.3 (capped at 1). FEO can no longer hold exactly.
pub fn mini_shift() -> FeoScenario {
    let base = [0.2, 0.6, 0.4, 0.9];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    // parents in edge order: T, C, S
    for p in base {
        for s in 0..2 {
            let q1: f64 = if s == 1 { (p + 0.3f64).min(1.0) } else { p };
            rows.push(vec![1.0 - q1, q1]);
        }
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let doc = NetworkDoc::new()
        .variable("T", ["0", "1"])
        .variable("S", ["0", "1"])
        .variable("C", ["0", "1"])
        .variable("Q", ["0", "1"])
        .edge("S", "C")
        .edge("T", "Q")
        .edge("C", "Q")
        .edge("S", "Q")
        .cpt("T", &[&[0.5, 0.5]])
        .cpt("S", &[&[0.5, 0.5]])
        .cpt("C", &[&[0.7, 0.3], &[0.2, 0.8]])
        .cpt("Q", &refs);
    let net = Network::from_doc(&doc).unwrap();
    let free = vec![feo_core::roles::FreeEntryDoc {
        given: [("S".to_string(), "0".to_string())].into_iter().collect(),
        state: None,
    }];
    assign_roles(&net, &roles(&["T"], &["S"], &["C", "Q"], "C", "Q"), Some(&free)).unwrap()
}

/// Three-sigma binomial half-width for a frequency estimated from `n` draws.
pub fn three_sigma(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Rows matching every `given` cell, and how many of those also match `hit`.
pub fn frequency(data: &feo_core::learning::Dataset, given: &[(&str, &str)], hit: (&str, &str)) -> (usize, usize) {
    let col = |name: &str| data.column_index(name).unwrap_or_else(|| panic!("no column {name}"));
    let given: Vec<(usize, &str)> = given.iter().map(|&(c, s)| (col(c), s)).collect();
    let (hc, hs) = (col(hit.0), hit.1);
    let mut n = 0;
    let mut k = 0;
    for rec in data.records() {
        if given.iter().all(|&(c, s)| rec[c] == s) {
            n += 1;
            if rec[hc] == hs {
                k += 1;
            }
        }
    }
    (n, k)
}

/// Whether two binomial frequencies differ by no more than three standard
/// errors of their difference (pooled estimate).
pub fn same_within_three_sigma(a: (usize, usize), b: (usize, usize)) -> bool {
    let p = (a.1 + b.1) as f64 / (a.0 + b.0) as f64;
    let se = (p * (1.0 - p) * (1.0 / a.0 as f64 + 1.0 / b.0 as f64)).sqrt();
    let gap = (a.1 as f64 / a.0 as f64 - b.1 as f64 / b.0 as f64).abs();
    gap <= 3.0 * se
}
