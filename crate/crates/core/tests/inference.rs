mod common;

use common::{random_network, roles, three_sigma};
use feo_core::fixtures;
use feo_core::inference::{conditional, eliminate, enumeration, feo_table, marginal, probability_of};
use feo_core::network::{Assignment, Evidence, Network};
use feo_core::roles::assign_roles;
use feo_core::sampler::{sample, SampleRequest};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_evidence(net: &Network, rng: &mut impl Rng, p: f64) -> Evidence {
    let mut ev = Evidence::empty(net.len());
    for v in 0..net.len() {
        if rng.gen_bool(p) {
            ev.set(v, rng.gen_range(0..net.cardinality(v)));
        }
    }
    ev
}

fn names(net: &Network, vars: &[usize]) -> Vec<String> {
    vars.iter().map(|&v| net.variable(v).name.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elimination_matches_enumeration(seed in any::<u64>(), n in 2usize..=6) {
        let net = random_network(seed, n, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let ev = random_evidence(&net, &mut rng, 0.3);
        let free: Vec<usize> = (0..n).filter(|&v| ev.get(v).is_none()).collect();
        let keep: Vec<usize> = free.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let oracle = enumeration::table(&net, &keep, &ev);
        let keep_names = names(&net, &keep);
        let keep_refs: Vec<&str> = keep_names.iter().map(String::as_str).collect();
        let fast = eliminate(&net, &keep_refs, &net.assignment(&ev)).unwrap();
        prop_assert_eq!(fast.scope(), oracle.scope());
        for (a, b) in fast.values().iter().zip(oracle.values()) {
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }
        let pe = enumeration::marginal(&net, &ev);
        prop_assert!((probability_of(&net, &ev) - pe).abs() <= 1e-12);
        if pe > 0.0 && !keep.is_empty() {
            let z = fast.total();
            for (a, b) in fast.values().iter().zip(oracle.values()) {
                prop_assert!((a / z - b / pe).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn polytree_elimination_matches_enumeration(seed in any::<u64>(), n in 2usize..=8) {
        // at most one parent per node gives a forest, hence a polytree
        let net = random_network(seed, n, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ev = random_evidence(&net, &mut rng, 0.25);
        let keep: Vec<usize> = (0..n).filter(|&v| ev.get(v).is_none() && rng.gen_bool(0.4)).collect();
        let oracle = enumeration::table(&net, &keep, &ev);
        let fast = feo_core::inference::eliminate(
            &net,
            &names(&net, &keep).iter().map(String::as_str).collect::<Vec<_>>(),
            &net.assignment(&ev),
        ).unwrap();
        for (a, b) in fast.values().iter().zip(oracle.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn full_joint_sums_to_one(seed in any::<u64>()) {
        let net = random_network(seed, 5, 3, 3);
        let mut total = 0.0;
        enumeration::for_each_completion(&net, &Evidence::empty(net.len()), |s| total += enumeration::joint(&net, s));
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn law_of_total_probability(seed in any::<u64>()) {
        let net = random_network(seed, 5, 3, 2);
        let sc = match assign_roles(&net, &roles(&["V0"], &["V1"], &["V2", "V3", "V4"], "V2", "V4"), None) {
            Ok(sc) => sc,
            Err(_) => return Ok(()),
        };
        let table = match feo_table(&sc) {
            Ok(t) => t,
            Err(_) => return Ok(()),
        };
        for row in table.rows.iter().filter(|r| r.sensitive.is_none()) {
            let j = Assignment::new().with("V0", row.justified[0].clone());
            let mut total = 0.0;
            for s in &net.variable(1).states {
                let p_s_given_j = conditional(&net, &Assignment::new().with("V1", s.clone()), &j).unwrap();
                total += table.probability(&[&row.justified[0]], Some(&[s]), &row.target).unwrap() * p_s_given_j;
            }
            prop_assert!((total - row.probability).abs() <= 1e-9);
        }
    }

    #[test]
    fn control_rows_do_not_move_conditioning_marginals(seed in any::<u64>()) {
        let net = random_network(seed, 5, 3, 2);
        let Ok(sc) = assign_roles(&net, &roles(&["V0"], &["V1"], &["V2", "V3", "V4"], "V3", "V4"), None) else {
            return Ok(());
        };
        let c = sc.control();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cpt = net.cpt(c);
        let probs: Vec<f64> = (0..cpt.num_rows()).flat_map(|_| common::random_row(&mut rng, cpt.cardinality())).collect();
        let edited = net.with_cpt(c, probs).unwrap();
        for j in &net.variable(0).states {
            for s in &net.variable(1).states {
                let a = Assignment::new().with("V0", j.clone()).with("V1", s.clone());
                prop_assert!((marginal(&net, &a).unwrap() - marginal(&edited, &a).unwrap()).abs() <= 1e-12);
            }
            let a = Assignment::new().with("V0", j.clone());
            prop_assert!((marginal(&net, &a).unwrap() - marginal(&edited, &a).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn college_job_marginal_matches_sampling() {
    let net = fixtures::get("college").unwrap().network().unwrap();
    let p = marginal(&net, &Assignment::new().with("Job", "yes")).unwrap();
    let n = 1_000_000;
    let data = sample(&net, &SampleRequest { count: n, seed: 11, columns: Some(vec!["Job".into()]) }).unwrap();
    let hits = data.records().iter().filter(|r| r[0] == "yes").count();
    let freq = hits as f64 / n as f64;
    assert!((freq - p).abs() <= three_sigma(p, n), "{freq} vs {p}");
}

#[test]
fn campaign_table_layout() {
    let sc = fixtures::get("campaign").unwrap().scenario().unwrap();
    let t = feo_table(&sc).unwrap();
    let conditioned: Vec<_> = t.rows.iter().filter(|r| r.sensitive.is_some()).collect();
    assert_eq!(conditioned.len(), 4 * 3);
    assert_eq!(t.target_states, ["not_elected", "nominee", "elected"]);
}

#[test]
fn mini_fixture_is_unfair_before_solving() {
    let sc = fixtures::get("mini").unwrap().scenario().unwrap();
    let t = feo_table(&sc).unwrap();
    for tv in ["0", "1"] {
        let a = t.probability(&[tv], Some(&["0"]), "1").unwrap();
        let b = t.probability(&[tv], Some(&["1"]), "1").unwrap();
        assert!((a - b).abs() > 0.1);
    }
}
