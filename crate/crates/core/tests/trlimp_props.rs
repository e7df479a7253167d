mod common;

use predkit_core::abstraction::PredicateSet;
use predkit_core::model::ModelTemplate;
use predkit_core::trlimp::{
    choose_preds_trlimp, comp_trans_level_imp, explore_trlimp, strictly_imprecise, TrlimpOptions,
};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn imprecision_survives_disjoint_refinement() {
    let mut rng = common::rng(31);
    let mut found = 0;
    for _ in 0..400 {
        if found >= 25 {
            break;
        }
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let a1 = PredicateSet::with_prefix(vec![common::predicate(&mut rng, &ts, &["x"])], "c");
        let labels = ts.labels();
        let r1 = &ts.transition(labels.choose(&mut rng).unwrap()).unwrap().relation;
        let r2 = &ts.transition(labels.choose(&mut rng).unwrap()).unwrap().relation;
        if !strictly_imprecise(r1, r2, &a1) {
            continue;
        }
        found += 1;
        let a2 = PredicateSet::with_prefix(vec![common::predicate(&mut rng, &ts, &["y"])], "d");
        assert!(strictly_imprecise(r1, r2, &a1.union(&a2)));
    }
    assert!(found >= 20);
}

#[test]
fn increments_are_bounded_and_sums_match() {
    let mut rng = common::rng(32);
    for _ in 0..10 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let fs = (0..3)
            .map(|i| common::predicate(&mut rng, &ts, if i == 1 { &["y"] } else { &["x"] }))
            .collect();
        let ps = PredicateSet::new(fs);
        let s = comp_trans_level_imp(&ts, &ps);
        for c in &s.contributions {
            assert!(c.increment > 0);
            assert!(c.increment <= if c.preds.len() == 1 { 2 } else { 4 });
        }
        for i in 0..3 {
            let total: u64 = s
                .contributions
                .iter()
                .filter(|c| c.preds == [i])
                .map(|c| c.increment)
                .sum();
            assert_eq!(total, s.is(i));
            for j in 0..3 {
                if i != j {
                    assert_eq!(s.pws(i, j), s.pws(j, i));
                }
            }
        }
    }
}

#[test]
fn nonzero_contribution_is_strict_imprecision() {
    let mut rng = common::rng(33);
    for _ in 0..10 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let ps = PredicateSet::new(vec![common::predicate(&mut rng, &ts, &["x"])]);
        let s = comp_trans_level_imp(&ts, &ps);
        for c in &s.contributions {
            let r1 = &ts.transition(&c.first).unwrap().relation;
            let r2 = &ts.transition(&c.then).unwrap().relation;
            assert!(strictly_imprecise(r1, r2, &ps));
        }
    }
}

#[test]
fn emitted_configs_avoid_imprecise_scopes() {
    let mut rng = common::rng(34);
    for _ in 0..8 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let fs = (0..4)
            .map(|_| {
                let shape: &[&str] = [&["x"][..], &["y"][..], &["x", "y"][..]][rng.gen_range(0..3)];
                common::predicate(&mut rng, &ts, shape)
            })
            .collect();
        let ps = PredicateSet::new(fs);
        let s = comp_trans_level_imp(&ts, &ps);
        let excluded: Vec<_> = (0..ps.len())
            .filter(|&i| s.is(i) > 0)
            .flat_map(|i| ps.get(i).scope.iter().cloned())
            .collect();
        let best = explore_trlimp(&ps, &s, 3, TrlimpOptions::default());
        for c in best.levels().iter().flatten() {
            for &i in &c.preds {
                assert_eq!(s.is(i), 0);
                assert!(ps.get(i).scope.iter().all(|v| !excluded.contains(v)));
            }
        }
    }
}

#[test]
fn choice_is_stable_under_reordering() {
    let tpl = ModelTemplate::parse(include_str!("../../../fixtures/ticket.pm")).unwrap();
    let ts = tpl.instantiate(2).unwrap();
    let texts = ["z <= 0", "z <= 1", "s = t", "s >= a_1", "t >= s", "z < 1", "z = 1"];
    let key = |order: &[usize]| {
        let ps = PredicateSet::new(order.iter().map(|&i| ts.parse_formula(texts[i]).unwrap()).collect());
        let s = comp_trans_level_imp(&ts, &ps);
        let c = choose_preds_trlimp(&ps, &s, 2, TrlimpOptions::default()).unwrap();
        let mut chosen: Vec<usize> = c.preds.iter().map(|&p| order[p]).collect();
        chosen.sort();
        (c.score, c.num_vars, chosen.len(), chosen)
    };
    let base = key(&[0, 1, 2, 3, 4, 5, 6]);
    let mut rng = common::rng(35);
    for _ in 0..3 {
        let mut order: Vec<usize> = (0..texts.len()).collect();
        order.shuffle(&mut rng);
        let k = key(&order);
        assert_eq!((k.0, k.1, k.2), (base.0, base.1, base.2));
    }
}
