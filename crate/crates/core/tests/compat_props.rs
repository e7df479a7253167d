mod common;

use predkit_core::checker::CheckLimits;
use predkit_core::compat::{
    choose_preds_compat, compute_compatibility, explore_compat, try_predicates, CompatibilityMatrix,
};
use predkit_core::model::{extract_candidate_predicates, ModelTemplate, TransitionSystem};
use rand::seq::SliceRandom;
use rand::Rng;

fn fixture(src: &str, n: usize) -> TransitionSystem {
    ModelTemplate::parse(src).unwrap().instantiate(n).unwrap()
}

/// Every configuration the search rejects fails on its own when checked.
fn assert_skips_fail(ts: &TransitionSystem, prop_text: &str, k: usize) -> usize {
    let prop = ts.parse_property(prop_text).unwrap();
    let ps = extract_candidate_predicates(ts, &prop);
    let limits = CheckLimits::default();
    let m = compute_compatibility(ts, &ps, &prop, limits, 4).unwrap();
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            assert_eq!(m.compat(i, j), m.compat(j, i));
        }
    }
    let ex = explore_compat(&ps, &m, k);
    for c in ex.best.levels().iter().flatten() {
        assert_eq!(c.score, m.cohesion(&c.preds));
    }
    for s in &ex.skipped {
        let t = try_predicates(ts, &ps, &s.config, &prop, limits);
        assert!(!t.holds(), "skipped {:?} verifies", s.config);
    }
    ex.skipped.len()
}

#[test]
fn ticket_skips_are_sound() {
    let ts = fixture(include_str!("../../../fixtures/ticket.pm"), 2);
    assert!(assert_skips_fail(&ts, "AG(z <= 1)", 2) > 0);
}

#[test]
fn driver_skips_are_sound() {
    let ts = fixture(include_str!("../../../fixtures/chardrv_like.pm"), 2);
    assert_skips_fail(&ts, "AG(mode = exclusive => users <= 1)", 3);
}

fn random_matrix(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

#[test]
fn fully_cohesive_config_wins_when_reachable() {
    let ts = common::parse("var x, y, w : int; transition t: true -> skip;");
    let mut rng = common::rng(41);
    for _ in 0..50 {
        let fs = (0..6).map(|_| common::predicate(&mut rng, &ts, &["x"])).collect();
        let ps = predkit_core::abstraction::PredicateSet::new(fs);
        let pairs = random_matrix(&mut rng, 6);
        let m = CompatibilityMatrix::from_compatible(6, &pairs);
        let k = 3;
        let c = choose_preds_compat(&ps, &m, k).unwrap();
        // all predicates share x, so nothing is skipped and every subset is reached
        let len = c.preds.len();
        let full = (len * (len - 1) / 2) as i64;
        let exists_full = subsets(6, len).iter().any(|s| m.cohesion(s) == full);
        if exists_full {
            assert_eq!(c.score, full, "{pairs:?}");
        }
    }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

#[test]
fn choice_is_stable_under_reordering() {
    let ts = common::parse("var x, y, w : int; transition t: true -> skip;");
    let texts = ["x <= 0", "y <= 0", "x + y <= 2", "w = 1", "y + w >= 0", "x = 2"];
    let pairs = [(0, 2), (1, 2), (1, 4), (3, 4), (0, 5)];
    let key = |order: &[usize]| {
        let ps = predkit_core::abstraction::PredicateSet::new(
            order.iter().map(|&i| ts.parse_formula(texts[i]).unwrap()).collect(),
        );
        let pos = |orig: usize| order.iter().position(|&o| o == orig).unwrap();
        let mapped: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (pos(a), pos(b))).collect();
        let m = CompatibilityMatrix::from_compatible(texts.len(), &mapped);
        let c = choose_preds_compat(&ps, &m, 3).unwrap();
        (c.score, c.num_vars, c.preds.len())
    };
    let base = key(&[0, 1, 2, 3, 4, 5]);
    let mut rng = common::rng(42);
    for _ in 0..5 {
        let mut order: Vec<usize> = (0..texts.len()).collect();
        order.shuffle(&mut rng);
        assert_eq!(key(&order), base);
    }
}
