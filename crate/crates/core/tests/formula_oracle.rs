//! Differential tests of the decision procedures against brute-force
//! evaluation over a small box.

use std::collections::BTreeMap;

use predkit_core::formula::{CmpOp, Formula, LinExpr, VarId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LO: i64 = -4;
const HI: i64 = 4;

fn vars() -> Vec<VarId> {
    vec![VarId::int("x"), VarId::int("y"), VarId::int("z"), VarId::boolean("p")]
}

fn boxed(vs: &[VarId]) -> Formula {
    Formula::and_all(vs.iter().filter(|v| !v.is_bool()).map(|v| {
        let e = LinExpr::var(v.clone());
        Formula::cmp(&e, CmpOp::Ge, &LinExpr::constant(LO))
            .and(&Formula::cmp(&e, CmpOp::Le, &LinExpr::constant(HI)))
    }))
}

fn random_atom(rng: &mut ChaCha8Rng, vs: &[VarId]) -> Formula {
    let ints: Vec<&VarId> = vs.iter().filter(|v| !v.is_bool()).collect();
    if rng.gen_bool(0.15) {
        return Formula::boolean(vs[3].clone(), rng.gen());
    }
    let mut e = LinExpr::zero();
    for v in &ints {
        if rng.gen_bool(0.6) {
            e = e.add(&LinExpr::term((*v).clone(), rng.gen_range(-3i64..=3)));
        }
    }
    let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    let op = ops[rng.gen_range(0..ops.len())];
    Formula::cmp(&e, op, &LinExpr::constant(rng.gen_range(-5i64..=5)))
}

fn random_formula(rng: &mut ChaCha8Rng, vs: &[VarId]) -> Formula {
    let ncubes = rng.gen_range(1..=3);
    Formula::or_all((0..ncubes).map(|_| {
        let natoms = rng.gen_range(1..=3);
        Formula::and_all((0..natoms).map(|_| random_atom(rng, vs)))
    }))
}

fn assignments(vs: &[VarId]) -> Vec<BTreeMap<VarId, i64>> {
    let mut out = vec![BTreeMap::new()];
    for v in vs {
        let range: Vec<i64> = if v.is_bool() { vec![0, 1] } else { (LO..=HI).collect() };
        out = out
            .into_iter()
            .flat_map(|m| {
                range.iter().map(move |&x| {
                    let mut m = m.clone();
                    m.insert(v.clone(), x);
                    m
                })
            })
            .collect();
    }
    out
}

fn eval(f: &Formula, m: &BTreeMap<VarId, i64>) -> bool {
    f.eval(&|v| m.get(v).copied()).expect("total assignment")
}

#[test]
fn satisfiability_matches_brute_force() {
    let vs = vars();
    let all = assignments(&vs);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let f = random_formula(&mut rng, &vs).and(&boxed(&vs));
        let brute = all.iter().any(|m| eval(&f, m));
        assert_eq!(f.satisfiable(), brute, "{f}");
    }
}

#[test]
fn negation_complements() {
    let vs = vars();
    let all = assignments(&vs);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..150 {
        let f = random_formula(&mut rng, &vs);
        let g = f.not();
        for m in &all {
            assert_ne!(eval(&f, m), eval(&g, m), "{f} vs {g} at {m:?}");
        }
    }
}

#[test]
fn elimination_matches_finite_disjunction() {
    let vs = vars();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for round in 0..200 {
        let f = random_formula(&mut rng, &vs).and(&boxed(&vs));
        let gone: Vec<VarId> = match round % 4 {
            0 => vec![vs[0].clone()],
            1 => vec![vs[0].clone(), vs[1].clone()],
            2 => vec![vs[2].clone(), vs[3].clone()],
            _ => vec![vs[1].clone()],
        };
        let kept: Vec<VarId> = vs.iter().filter(|v| !gone.contains(v)).cloned().collect();
        let g = f.exists(&gone);
        for v in &gone {
            assert!(!g.mentions(v), "{g} still mentions {v}");
        }
        let inner = assignments(&gone);
        for m in assignments(&kept) {
            let want = inner.iter().any(|n| {
                let mut full = m.clone();
                full.extend(n.iter().map(|(k, v)| (k.clone(), *v)));
                eval(&f, &full)
            });
            assert_eq!(eval(&g, &m), want, "∃{gone:?}. {f} gave {g} at {m:?}");
        }
    }
}

#[test]
fn mutual_entailment_iff_same_truth_table() {
    let vs = vars();
    let all = assignments(&vs);
    let b = boxed(&vs);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut equal_seen = 0;
    for round in 0..200 {
        let f = random_formula(&mut rng, &vs).and(&b);
        // every few rounds compare against a rewritten copy of f
        let g = if round % 3 == 0 {
            f.not().not().and(&b)
        } else {
            random_formula(&mut rng, &vs).and(&b)
        };
        let same = all.iter().all(|m| eval(&f, m) == eval(&g, m));
        let fg = all.iter().all(|m| !eval(&f, m) || eval(&g, m));
        assert_eq!(f.entails(&g), fg, "{f} ⟹ {g}");
        assert_eq!(f.equivalent(&g), same, "{f} ≡ {g}");
        equal_seen += usize::from(same);
    }
    assert!(equal_seen > 30);
}

#[test]
fn simplify_preserves_meaning() {
    let vs = vars();
    let all = assignments(&vs);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let f = random_formula(&mut rng, &vs);
        let s = f.simplify();
        assert!(s.cubes().len() <= f.cubes().len());
        for m in &all {
            assert_eq!(eval(&f, m), eval(&s, m));
        }
    }
}
