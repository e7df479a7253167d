mod common;

use predkit_core::abstraction::{
    alpha_state, alpha_state_direct, alpha_trans, alpha_trans_direct, consistency_constraint, gamma, PredicateSet,
};
use predkit_core::formula::{Formula, VarId};
use predkit_core::model::{ModelTemplate, TransitionSystem};
use rand::Rng;

fn ticket(n: usize) -> TransitionSystem {
    ModelTemplate::parse(include_str!("../../../fixtures/ticket.pm"))
        .unwrap()
        .instantiate(n)
        .unwrap()
}

fn zpreds(ts: &TransitionSystem) -> PredicateSet {
    PredicateSet::new(vec![ts.parse_formula("z = 1").unwrap(), ts.parse_formula("z < 1").unwrap()])
}

fn b(name: &str, pos: bool) -> Formula {
    let v = match name.strip_suffix('\'') {
        Some(base) => VarId::boolean(base).primed(),
        None => VarId::boolean(name),
    };
    Formula::boolean(v, pos)
}

fn random_set(rng: &mut rand_chacha::ChaCha8Rng, ts: &TransitionSystem) -> PredicateSet {
    let shapes: [&[&str]; 4] = [&["x"], &["y"], &["x", "y"], &["x"]];
    let n = rng.gen_range(1..=3);
    let fs = (0..n)
        .map(|_| {
            let shape = shapes[rng.gen_range(0..shapes.len())];
            common::predicate(rng, ts, shape)
        })
        .collect();
    PredicateSet::new(fs)
}

#[test]
fn states_and_steps_are_over_approximated() {
    let mut rng = common::rng(21);
    for _ in 0..60 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let ps = random_set(&mut rng, &ts);
        let s = ts
            .parse_formula(&common::state_formula(&mut rng, &["x", "y"], &["p"]))
            .unwrap();
        assert!(s.entails(&gamma(&alpha_state(&s, &ps), &ps)));
        for t in &ts.transitions {
            assert!(t.relation.entails(&gamma(&alpha_trans(&t.relation, &ps), &ps)), "{}", t.relation);
        }
    }
}

#[test]
fn region_split_matches_the_definition() {
    let mut rng = common::rng(22);
    for _ in 0..40 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let ps = random_set(&mut rng, &ts);
        let s = ts
            .parse_formula(&common::state_formula(&mut rng, &["x", "y"], &["p"]))
            .unwrap();
        assert!(alpha_state(&s, &ps).equivalent(&alpha_state_direct(&s, &ps)));
        let r = &ts.transitions[rng.gen_range(0..ts.transitions.len())].relation;
        assert!(alpha_trans(r, &ps).equivalent(&alpha_trans_direct(r, &ps)), "{r}");
    }
}

#[test]
fn abstraction_is_monotone() {
    let mut rng = common::rng(23);
    for _ in 0..30 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let ps = random_set(&mut rng, &ts);
        let s1 = ts
            .parse_formula(&common::state_formula(&mut rng, &["x", "y"], &["p"]))
            .unwrap();
        let s2 = s1.or(&ts.parse_formula(&common::atom(&mut rng, &["x", "y"])).unwrap());
        assert!(alpha_state(&s1, &ps).entails(&alpha_state(&s2, &ps)));
    }
}

#[test]
fn consistency_constraint_for_ticket_predicates() {
    let ts = ticket(2);
    let ps = zpreds(&ts);
    let same = ts.parse_relation("z' = z").unwrap();
    let want = same
        .implies(&b("b1'", true).iff(&b("b1", true)))
        .and(&same.implies(&b("b2'", true).iff(&b("b2", true))));
    assert!(consistency_constraint(&ps).equivalent(&want));
}

#[test]
fn entering_the_critical_section() {
    let ts = ticket(2);
    let ps = zpreds(&ts);
    let r = ts.parse_relation("pc_1 = try & s >= a_1 & z' = z + 1 & pc_1' = cr").unwrap();
    let got = alpha_trans(&r, &ps);
    let (b1, b2, n1, n2) = (b("b1", true), b("b2", true), b("b1'", true), b("b2'", true));
    let regions = b1
        .and(&b2.not())
        .and(&n1.not())
        .and(&n2.not())
        .or(&b1.not().and(&b2).and(&n1.or(&n2)))
        .or(&b1.not().and(&b2.not()).and(&n1.not()).and(&n2.not()));
    let want = ts
        .parse_relation("pc_1 = try & s >= a_1 & pc_1' = cr")
        .unwrap()
        .and(&regions);
    let feasible = b1.and(&b2).not().and(&n1.and(&n2).not());
    assert!(got.and(&feasible).equivalent(&want.and(&feasible)));
    // the abstraction itself never produces an infeasible region
    assert!(got.entails(&feasible));
}

#[test]
fn alpha_of_ticket_initial_states() {
    let ts = ticket(2);
    let ps = zpreds(&ts);
    let a = alpha_state(&ts.init, &ps);
    assert!(a.entails(&b("b2", true)));
    assert!(a.entails(&b("b1", false)));
}

fn three_ints() -> TransitionSystem {
    common::parse("var x, y, w : int; var p : bool; transition t: true -> skip;")
}

#[test]
fn sequential_abstraction_commutes_over_disjoint_sets() {
    let ts = three_ints();
    let mut rng = common::rng(24);
    for _ in 0..40 {
        let f = ts
            .parse_formula(&common::state_formula(&mut rng, &["x", "y", "w"], &["p"]))
            .unwrap();
        let ps1 = PredicateSet::with_prefix(vec![common::predicate(&mut rng, &ts, &["x"])], "c");
        let ps2 = PredicateSet::with_prefix(
            vec![
                common::predicate(&mut rng, &ts, &["y"]),
                common::predicate(&mut rng, &ts, &["y", "w"]),
            ],
            "d",
        );
        let joint = alpha_state(&f, &ps1.union(&ps2));
        assert!(alpha_state(&alpha_state(&f, &ps1), &ps2).equivalent(&joint), "{f}");
        assert!(alpha_state(&alpha_state(&f, &ps2), &ps1).equivalent(&joint), "{f}");
    }
}

#[test]
fn consistency_constraint_golden() {
    let ts = common::parse("var a, b, c : int; transition t: true -> skip;");
    let ps = PredicateSet::new(vec![ts.parse_formula("a > b").unwrap(), ts.parse_formula("c = 0").unwrap()]);
    let ab = ts.parse_relation("a' = a & b' = b").unwrap();
    let c = ts.parse_relation("c' = c").unwrap();
    let want = ab
        .implies(&b("b1'", true).iff(&b("b1", true)))
        .and(&c.implies(&b("b2'", true).iff(&b("b2", true))));
    assert!(consistency_constraint(&ps).equivalent(&want));
}

#[test]
fn unchanged_scope_keeps_predicate_values() {
    let mut rng = common::rng(25);
    for _ in 0..30 {
        let ts = common::parse(&common::boxed_system_source(&mut rng));
        let ps = random_set(&mut rng, &ts);
        for t in &ts.transitions {
            let abs = alpha_trans(&t.relation, &ps);
            for p in &ps {
                let may_change = t
                    .relation
                    .and(&Formula::and_all(p.scope.iter().map(predkit_core::model::frame)).not())
                    .satisfiable();
                if may_change {
                    continue;
                }
                let keep = Formula::boolean(p.bool_var.primed(), true).iff(&Formula::boolean(p.bool_var.clone(), true));
                assert!(abs.entails(&keep), "{} over {}", t.relation, p.formula);
            }
            let scope = ps.scope();
            assert!(abs
                .vars()
                .iter()
                .all(|v| !scope.contains(v) && !scope.contains(&v.unprimed())));
        }
    }
}

#[test]
fn property_round_trip() {
    let ts = ticket(2);
    let ps = zpreds(&ts);
    for text in ["AG(z <= 1)", "AG(z != 1 | s >= t)", "AF(z < 1)", "AG(z = 1 => AF(z < 1))"] {
        let p = ts.parse_property(text).unwrap();
        let a = predkit_core::abstraction::abstract_property(&p, &ps, &ts.restriction).unwrap();
        let back = predkit_core::abstraction::concretize_property(&a, &ps);
        assert!(back.equivalent(&p), "{text}: {back}");
    }
}
