//! Exact quantifier elimination over cubes.
//!
//! Booleans are removed by Shannon expansion, which on a cube simply drops the
//! literal. Integer variables go through, in order of preference:
//!
//! * substitution from an equality with a unit coefficient;
//! * substitution from a non-unit equality `a·x + r = 0`, which scales the
//!   other constraints by `a` and records `a | r`;
//! * dropping all bounds when `x` is bounded on one side only;
//! * Fourier-Motzkin when every lower/upper pair has a unit coefficient on
//!   `x` (the real and integer shadows coincide then);
//! * Cooper's method otherwise, which introduces divisibility atoms.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::atom::{Atom, Lit};
use super::cube::Cube;
use super::linear::LinExpr;
use super::VarId;

/// Cap on the number of residues Cooper's method may enumerate per bound.
/// Coefficients in the models handled here stay tiny; a blow-up beyond this
/// indicates a malformed input rather than a hard instance.
const MAX_COOPER_PERIOD: u64 = 1 << 16;

/// Eliminates the given variables from a cube, returning an equivalent
/// disjunction of cubes.
pub fn eliminate_cube(cube: &Cube, vars: &[VarId]) -> Vec<Cube> {
    let (bools, ints): (Vec<&VarId>, Vec<&VarId>) = vars.iter().partition(|v| v.is_bool());
    let start = if bools.is_empty() {
        cube.clone()
    } else {
        Cube::from_atoms(cube.atoms().iter().filter(|a| match a {
            Atom::Bool { var, .. } => !bools.contains(&var),
            _ => true,
        }).cloned())
        .expect("dropping literals keeps a cube consistent")
    };
    let mut done = Vec::new();
    let mut work = vec![start];
    while let Some(c) = work.pop() {
        let pending: Vec<&VarId> = ints.iter().copied().filter(|v| c.mentions(v)).collect();
        match pick_var(&c, &pending) {
            None => done.push(c),
            Some(x) => work.extend(eliminate_var(&c, x)),
        }
    }
    done
}

/// Exact satisfiability of a cube over the integers and booleans.
pub fn cube_sat(cube: &Cube) -> bool {
    if cube.atoms().iter().all(|a| a.is_bool()) {
        return true;
    }
    if let Some(hit) = SAT_CACHE.with(|c| c.borrow().get(cube).copied()) {
        return hit;
    }
    let r = cube_sat_uncached(cube);
    SAT_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= SAT_CACHE_LIMIT {
            c.clear();
        }
        c.insert(cube.clone(), r);
    });
    r
}

const SAT_CACHE_LIMIT: usize = 1 << 18;

thread_local! {
    static SAT_CACHE: RefCell<HashMap<Cube, bool>> = RefCell::new(HashMap::new());
}

fn cube_sat_uncached(cube: &Cube) -> bool {
    let ints: Vec<VarId> = cube.vars().into_iter().filter(|v| !v.is_bool()).collect();
    let refs: Vec<&VarId> = ints.iter().collect();
    sat_rec(cube, &refs)
}

fn sat_rec(cube: &Cube, vars: &[&VarId]) -> bool {
    let pending: Vec<&VarId> = vars.iter().copied().filter(|v| cube.mentions(v)).collect();
    match pick_var(cube, &pending) {
        None => true,
        Some(x) => eliminate_var(cube, x)
            .iter()
            .any(|c| sat_rec(c, &pending)),
    }
}

struct VarProfile {
    unit_eq: bool,
    eq: bool,
    lower: usize,
    upper: usize,
    unit_pairs: bool,
    divs: usize,
    period: BigInt,
}

fn profile(cube: &Cube, x: &VarId) -> VarProfile {
    let mut p = VarProfile {
        unit_eq: false,
        eq: false,
        lower: 0,
        upper: 0,
        unit_pairs: true,
        divs: 0,
        period: BigInt::one(),
    };
    let mut lower_nonunit = false;
    let mut upper_nonunit = false;
    for a in cube.atoms() {
        let c = a.coeff(x);
        if c.is_zero() {
            continue;
        }
        p.period = p.period.lcm(&c.abs());
        match a {
            Atom::Eq(_) => {
                p.eq = true;
                if c.abs().is_one() {
                    p.unit_eq = true;
                }
            }
            Atom::Le(_) => {
                if c.is_negative() {
                    p.lower += 1;
                    lower_nonunit |= !c.abs().is_one();
                } else {
                    p.upper += 1;
                    upper_nonunit |= !c.abs().is_one();
                }
            }
            Atom::Div { modulus, .. } => {
                p.divs += 1;
                p.period = p.period.lcm(modulus);
            }
            Atom::Bool { .. } => {}
        }
    }
    // FM is exact if no pair has non-unit coefficients on both sides; a
    // conservative check over the whole cube.
    p.unit_pairs = !(lower_nonunit && upper_nonunit);
    p
}

fn cost(p: &VarProfile) -> u64 {
    if p.unit_eq {
        return 0;
    }
    if p.eq {
        return 1;
    }
    if p.divs == 0 && (p.lower == 0 || p.upper == 0) {
        return 0;
    }
    if p.divs == 0 && p.unit_pairs {
        return 2 + (p.lower * p.upper) as u64;
    }
    let period = p.period.to_u64().unwrap_or(u64::MAX / 4).min(u64::MAX / 4);
    let side = if p.lower == 0 || p.upper == 0 {
        1
    } else {
        p.lower.min(p.upper) as u64
    };
    1000u64.saturating_add(side.saturating_mul(period))
}

fn pick_var<'a>(cube: &Cube, vars: &[&'a VarId]) -> Option<&'a VarId> {
    vars.iter()
        .copied()
        .min_by_key(|v| (cost(&profile(cube, v)), (*v).clone()))
}

/// Eliminates a single integer variable.
pub(crate) fn eliminate_var(cube: &Cube, x: &VarId) -> Vec<Cube> {
    let (with_x, rest): (Vec<&Atom>, Vec<&Atom>) = cube.atoms().iter().partition(|a| a.mentions(x));
    if with_x.is_empty() {
        return vec![cube.clone()];
    }
    let rest: Vec<Atom> = rest.into_iter().cloned().collect();

    // Equalities first, smallest coefficient.
    let best_eq = with_x
        .iter()
        .filter_map(|a| match a {
            Atom::Eq(e) => Some((e.coeff(x).unwrap().abs(), *a)),
            _ => None,
        })
        .min_by(|a, b| a.0.cmp(&b.0));
    if let Some((_, Atom::Eq(e))) = best_eq {
        return eliminate_by_equality(e, x, &with_x, rest).into_iter().collect();
    }

    let mut lowers: Vec<(BigInt, LinExpr)> = Vec::new(); // a·x >= s
    let mut uppers: Vec<(BigInt, LinExpr)> = Vec::new(); // b·x <= u
    let mut has_div = false;
    for a in &with_x {
        match a {
            Atom::Le(e) => {
                let (c, r) = e.split_off(x);
                if c.is_negative() {
                    lowers.push((-c, r));
                } else {
                    uppers.push((c, r.neg()));
                }
            }
            Atom::Div { .. } => has_div = true,
            _ => unreachable!("equalities handled above"),
        }
    }

    if !has_div && (lowers.is_empty() || uppers.is_empty()) {
        return Cube::from_atoms(rest).into_iter().collect();
    }

    let exact_fm = lowers
        .iter()
        .all(|(a, _)| a.is_one())
        || uppers.iter().all(|(b, _)| b.is_one());
    if !has_div && exact_fm {
        let mut atoms = rest;
        for (a, s) in &lowers {
            for (b, u) in &uppers {
                // a·x >= s, b·x <= u  ⇒  b·s <= a·u
                match Atom::le(s.scale(b).sub(&u.scale(a))) {
                    Lit::True => {}
                    Lit::False => return Vec::new(),
                    Lit::Atom(at) => atoms.push(at),
                }
            }
        }
        return Cube::from_atoms(atoms).into_iter().collect();
    }

    cooper(x, &with_x, rest)
}

fn eliminate_by_equality(e: &LinExpr, x: &VarId, with_x: &[&Atom], rest: Vec<Atom>) -> Option<Cube> {
    let (mut a, mut r) = e.split_off(x);
    if a.is_negative() {
        a = -a;
        r = r.neg();
    }
    // a·x + r = 0
    let mut lits: Vec<Lit> = rest.into_iter().map(Lit::Atom).collect();
    if a.is_one() {
        let val = r.neg();
        for at in with_x {
            if at.linear_expr() == Some(e) && matches!(at, Atom::Eq(_)) {
                continue;
            }
            lits.push(at.substitute(x, &val));
        }
    } else {
        lits.push(Atom::divides(a.clone(), r.clone(), true));
        for at in with_x {
            if at.linear_expr() == Some(e) && matches!(at, Atom::Eq(_)) {
                continue;
            }
            // c·x + s  ⋈ 0  ⇒  a·(c·x + s) = -c·r + a·s  ⋈ 0
            let (c, s) = at.linear_expr().unwrap().split_off(x);
            let scaled = r.scale(&-c).add(&s.scale(&a));
            lits.push(match at {
                Atom::Le(_) => Atom::le(scaled),
                Atom::Eq(_) => Atom::eq(scaled),
                Atom::Div {
                    modulus, positive, ..
                } => Atom::divides(modulus * &a, scaled, *positive),
                Atom::Bool { .. } => unreachable!(),
            });
        }
    }
    Cube::from_lits(lits)
}

/// Atom rewritten in terms of `y = δ·x`, carrying only the sign of `y`.
enum Scaled {
    Le { sign: i8, rest: LinExpr },
    Div { sign: i8, rest: LinExpr, modulus: BigInt, positive: bool },
}

fn cooper(x: &VarId, with_x: &[&Atom], rest: Vec<Atom>) -> Vec<Cube> {
    let delta = with_x
        .iter()
        .fold(BigInt::one(), |acc, a| acc.lcm(&a.coeff(x).abs()));
    let mut scaled = Vec::with_capacity(with_x.len());
    let mut period = delta.clone();
    for a in with_x {
        let (c, s) = a.linear_expr().unwrap().split_off(x);
        let k = &delta / c.abs();
        let sign: i8 = if c.is_negative() { -1 } else { 1 };
        match a {
            Atom::Le(_) => scaled.push(Scaled::Le {
                sign,
                rest: s.scale(&k),
            }),
            Atom::Div {
                modulus, positive, ..
            } => {
                let m = modulus * &k;
                period = period.lcm(&m);
                scaled.push(Scaled::Div {
                    sign,
                    rest: s.scale(&k),
                    modulus: m,
                    positive: *positive,
                });
            }
            _ => unreachable!(),
        }
    }
    let period_u = period
        .to_u64()
        .filter(|p| *p <= MAX_COOPER_PERIOD)
        .expect("Cooper period exceeds supported bound");

    // lower bounds: -y + s <= 0  ⇒ y >= s ; upper: y + s <= 0  ⇒ y <= -s
    let lowers: Vec<LinExpr> = scaled
        .iter()
        .filter_map(|s| match s {
            Scaled::Le { sign: -1, rest } => Some(rest.clone()),
            _ => None,
        })
        .collect();
    let uppers: Vec<LinExpr> = scaled
        .iter()
        .filter_map(|s| match s {
            Scaled::Le { sign: 1, rest } => Some(rest.neg()),
            _ => None,
        })
        .collect();

    let instantiate = |y: &LinExpr, keep_bounds: bool| -> Option<Cube> {
        let mut lits: Vec<Lit> = rest.iter().cloned().map(Lit::Atom).collect();
        lits.push(Atom::divides(delta.clone(), y.clone(), true));
        for s in &scaled {
            match s {
                Scaled::Le { sign, rest } => {
                    if keep_bounds {
                        lits.push(Atom::le(signed(y, *sign).add(rest)));
                    }
                }
                Scaled::Div {
                    sign,
                    rest,
                    modulus,
                    positive,
                } => lits.push(Atom::divides(
                    modulus.clone(),
                    signed(y, *sign).add(rest),
                    *positive,
                )),
            }
        }
        Cube::from_lits(lits)
    };

    let mut out = Vec::new();
    if lowers.is_empty() || uppers.is_empty() {
        // y unbounded on one side: only the residue class matters
        for j in 0..period_u {
            out.extend(instantiate(&LinExpr::constant(j), false));
        }
    } else if lowers.len() <= uppers.len() {
        for l in &lowers {
            for j in 0..period_u {
                out.extend(instantiate(&l.add_constant(&j.into()), true));
            }
        }
    } else {
        for u in &uppers {
            for j in 0..period_u {
                out.extend(instantiate(&u.add_constant(&-BigInt::from(j)), true));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn signed(e: &LinExpr, sign: i8) -> LinExpr {
    if sign < 0 {
        e.neg()
    } else {
        e.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::atom::CmpOp;

    fn lit(lhs: LinExpr, op: CmpOp, rhs: LinExpr) -> Lit {
        Atom::compare(&lhs, op, &rhs).pop().unwrap()
    }

    fn v(n: &str) -> LinExpr {
        LinExpr::var(VarId::int(n))
    }

    fn k(c: i64) -> LinExpr {
        LinExpr::constant(c)
    }

    #[test]
    fn contradictory_bounds_unsat() {
        let c = Cube::from_lits([
            lit(v("x"), CmpOp::Ge, v("y")),
            lit(v("x"), CmpOp::Lt, v("y")),
        ]);
        assert!(c.is_none() || !cube_sat(&c.unwrap()));
    }

    #[test]
    fn parity_needs_integers() {
        // 2x = y ∧ 2z = y + 1 is unsat over the integers but not the reals
        let c = Cube::from_lits([
            lit(v("x").scale(&2.into()), CmpOp::Eq, v("y")),
            lit(v("z").scale(&2.into()), CmpOp::Eq, v("y").add(&k(1))),
        ])
        .unwrap();
        assert!(!cube_sat(&c));
    }

    #[test]
    fn dark_shadow_gap() {
        // 1 <= 3x <= 2 has real solutions only
        let c = Cube::from_lits([
            lit(v("x").scale(&3.into()), CmpOp::Ge, k(1)),
            lit(v("x").scale(&3.into()), CmpOp::Le, k(2)),
        ]);
        assert!(c.is_none() || !cube_sat(&c.unwrap()));
        // 2 <= 3x + 2y <= 2, x,y >= 0 has x=0,y=1
        let c = Cube::from_lits([
            lit(v("x").scale(&3.into()).add(&v("y").scale(&2.into())), CmpOp::Eq, k(2)),
            lit(v("x"), CmpOp::Ge, k(0)),
            lit(v("y"), CmpOp::Ge, k(0)),
        ])
        .unwrap();
        assert!(cube_sat(&c));
    }

    #[test]
    fn projection_keeps_divisibility() {
        // ∃x. y = 2x  ⇔  2 | y
        let c = Cube::from_lits([lit(v("y"), CmpOp::Eq, v("x").scale(&2.into()))]).unwrap();
        let out = eliminate_cube(&c, &[VarId::int("x")]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "divides(2, y)");
    }

    #[test]
    fn unit_equality_substitutes() {
        // ∃x'. x' = x + 1 ∧ x' <= 3  ⇔  x <= 2
        let xp = VarId::int("x").primed();
        let c = Cube::from_lits([
            lit(LinExpr::var(xp.clone()), CmpOp::Eq, v("x").add(&k(1))),
            lit(LinExpr::var(xp.clone()), CmpOp::Le, k(3)),
        ])
        .unwrap();
        let out = eliminate_cube(&c, &[xp]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "x <= 2");
    }
}
