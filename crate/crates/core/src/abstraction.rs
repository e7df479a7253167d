//! Partial predicate abstraction.
//!
//! Only the variables in predicate scopes are quantified away; every other
//! variable keeps its concrete semantics. Both the state and the transition
//! abstraction are computed region by region: for each sign assignment σ of
//! the predicates, `bσ ∧ ∃V(φ). (s ∧ φσ)`. This is the same formula as the
//! quantified conjunction with `φᵢ ⟺ bᵢ`, split on the values of `b`.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Formula, VarId};
use crate::model::{CtlProperty, TransitionSystem};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    /// Position in the candidate list the predicate came from.
    pub id: usize,
    pub formula: Formula,
    pub bool_var: VarId,
    pub scope: BTreeSet<VarId>,
}

impl Predicate {
    fn new(id: usize, formula: Formula, bool_var: VarId) -> Predicate {
        let scope = formula.vars();
        assert!(
            scope.iter().all(|v| !v.is_next()),
            "predicate `{formula}` mentions a next-state variable"
        );
        Predicate {
            id,
            formula,
            bool_var,
            scope,
        }
    }
}

/// An ordered sequence of predicates with their boolean variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredicateSet {
    preds: Vec<Predicate>,
}

impl PredicateSet {
    /// Predicates `b1 … bn` in the given order.
    pub fn new(formulas: Vec<Formula>) -> PredicateSet {
        PredicateSet::with_prefix(formulas, "b")
    }

    pub fn with_prefix(formulas: Vec<Formula>, prefix: &str) -> PredicateSet {
        PredicateSet {
            preds: formulas
                .into_iter()
                .enumerate()
                .map(|(i, f)| Predicate::new(i, f, VarId::boolean(&format!("{prefix}{}", i + 1))))
                .collect(),
        }
    }

    pub fn from_predicates(preds: Vec<Predicate>) -> PredicateSet {
        let mut names = BTreeSet::new();
        for p in &preds {
            assert!(names.insert(p.bool_var.clone()), "duplicate boolean variable {}", p.bool_var);
        }
        PredicateSet { preds }
    }

    /// The predicates at the given positions, keeping ids and variables.
    pub fn subset(&self, positions: &[usize]) -> PredicateSet {
        PredicateSet::from_predicates(positions.iter().map(|&i| self.preds[i].clone()).collect())
    }

    /// Concatenation; the boolean variables must be distinct.
    pub fn union(&self, other: &PredicateSet) -> PredicateSet {
        PredicateSet::from_predicates(self.preds.iter().chain(&other.preds).cloned().collect())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Predicate> {
        self.preds.iter()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn get(&self, i: usize) -> &Predicate {
        &self.preds[i]
    }

    /// `V(φ)`.
    pub fn scope(&self) -> BTreeSet<VarId> {
        self.preds.iter().flat_map(|p| p.scope.iter().cloned()).collect()
    }

    pub fn bool_vars(&self) -> Vec<VarId> {
        self.preds.iter().map(|p| p.bool_var.clone()).collect()
    }

    fn scope_vec(&self) -> Vec<VarId> {
        self.scope().into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a PredicateSet {
    type Item = &'a Predicate;
    type IntoIter = std::slice::Iter<'a, Predicate>;

    fn into_iter(self) -> Self::IntoIter {
        self.preds.iter()
    }
}

/// `V(φ₁) ∩ V(φ₂) = ∅`.
pub fn disjoint(ps1: &PredicateSet, ps2: &PredicateSet) -> bool {
    ps1.scope().is_disjoint(&ps2.scope())
}

/// Literal cube `⋀ ±bᵢ` for a sign vector.
fn sign_cube(vars: &[VarId], signs: &[bool]) -> Formula {
    Formula::and_all(
        vars.iter()
            .zip(signs)
            .map(|(v, s)| Formula::boolean(v.clone(), *s)),
    )
}

/// Depth-first enumeration of the satisfiable sign regions of `preds` inside
/// `base`. Each result pairs the sign vector with `base ∧ φσ`.
fn regions(base: &Formula, preds: &[(Formula, Formula)]) -> Vec<(Vec<bool>, Formula)> {
    let mut out = Vec::new();
    let mut signs = Vec::with_capacity(preds.len());
    walk(base, preds, &mut signs, &mut out);
    out
}

fn walk(
    cur: &Formula,
    preds: &[(Formula, Formula)],
    signs: &mut Vec<bool>,
    out: &mut Vec<(Vec<bool>, Formula)>,
) {
    let Some(((pos, neg), rest)) = preds.split_first() else {
        out.push((signs.clone(), cur.clone()));
        return;
    };
    for (sign, lit) in [(true, pos), (false, neg)] {
        let next = cur.and(lit);
        if next.satisfiable() {
            signs.push(sign);
            walk(&next, rest, signs, out);
            signs.pop();
        }
    }
}

fn polarities(ps: &PredicateSet, next: bool) -> Vec<(Formula, Formula)> {
    ps.iter()
        .map(|p| {
            let f = if next { p.formula.to_next() } else { p.formula.clone() };
            let n = f.not();
            (f, n)
        })
        .collect()
}

/// `α(s) = ∃V(φ). (s ∧ ⋀ φᵢ ⟺ bᵢ)`.
pub fn alpha_state(s: &Formula, ps: &PredicateSet) -> Formula {
    if ps.is_empty() {
        return s.clone();
    }
    let scope = ps.scope_vec();
    let bs = ps.bool_vars();
    Formula::or_all(
        regions(s, &polarities(ps, false))
            .into_iter()
            .map(|(signs, r)| sign_cube(&bs, &signs).and(&r.exists(&scope))),
    )
}

/// `γ(s♯) = s♯[φ/b, φ'/b']`.
pub fn gamma(sabs: &Formula, ps: &PredicateSet) -> Formula {
    let mut map = BTreeMap::new();
    for p in ps {
        map.insert(p.bool_var.clone(), p.formula.clone());
        map.insert(p.bool_var.primed(), p.formula.to_next());
    }
    sabs.substitute_bools(&map)
}

fn unchanged(scope: &BTreeSet<VarId>) -> Formula {
    Formula::and_all(scope.iter().map(crate::model::frame))
}

/// `CS = ⋀ᵢ ((⋀_{v ∈ V(φᵢ)} v' = v) ⟹ (bᵢ' ⟺ bᵢ))`.
pub fn consistency_constraint(ps: &PredicateSet) -> Formula {
    Formula::and_all(ps.iter().map(|p| {
        let b = Formula::boolean(p.bool_var.clone(), true);
        let bn = Formula::boolean(p.bool_var.primed(), true);
        unchanged(&p.scope).implies(&bn.iff(&b))
    }))
}

/// `α^τ(r) = ∃V(φ) ∃V(φ'). (r ∧ CS ∧ ⋀ φᵢ⟺bᵢ ∧ ⋀ φᵢ'⟺bᵢ')`.
///
/// Computed per pair of current/next sign regions. Inside a region pair the
/// conjunct of CS for predicate `i` is implied whenever the two signs of `i`
/// agree, and otherwise reduces to "some variable of `V(φᵢ)` changes"; both
/// are conjoined before the elimination.
pub fn alpha_trans(r: &Formula, ps: &PredicateSet) -> Formula {
    if ps.is_empty() {
        return r.clone();
    }
    let mut scope = ps.scope_vec();
    scope.extend(ps.scope_vec().iter().map(VarId::primed));
    let bs = ps.bool_vars();
    let bns: Vec<VarId> = bs.iter().map(VarId::primed).collect();
    let changes: Vec<Formula> = ps.iter().map(|p| unchanged(&p.scope).not()).collect();
    let next_pols = polarities(ps, true);
    let mut out = Vec::new();
    for (cur_signs, rc) in regions(r, &polarities(ps, false)) {
        for (next_signs, rn) in regions(&rc, &next_pols) {
            let mut body = rn;
            for (i, ch) in changes.iter().enumerate() {
                if cur_signs[i] != next_signs[i] {
                    body = body.and(ch);
                }
            }
            if body.is_false() {
                continue;
            }
            let abs = body.exists(&scope);
            if abs.is_false() {
                continue;
            }
            out.push(
                sign_cube(&bs, &cur_signs)
                    .and(&sign_cube(&bns, &next_signs))
                    .and(&abs),
            );
        }
    }
    Formula::or_all(out)
}

/// Direct evaluation of the defining formula of `α^τ`, without the region
/// split. Exponential in the number of predicates; meant for cross-checks.
pub fn alpha_trans_direct(r: &Formula, ps: &PredicateSet) -> Formula {
    let mut scope = ps.scope_vec();
    scope.extend(ps.scope_vec().iter().map(VarId::primed));
    let mut body = r.and(&consistency_constraint(ps));
    for p in ps {
        let b = Formula::boolean(p.bool_var.clone(), true);
        let bn = Formula::boolean(p.bool_var.primed(), true);
        body = body.and(&p.formula.iff(&b)).and(&p.formula.to_next().iff(&bn));
    }
    body.exists(&scope)
}

/// Direct evaluation of `∃V(φ). (s ∧ ⋀ φᵢ ⟺ bᵢ)`.
pub fn alpha_state_direct(s: &Formula, ps: &PredicateSet) -> Formula {
    let mut body = s.clone();
    for p in ps {
        body = body.and(&p.formula.iff(&Formula::boolean(p.bool_var.clone(), true)));
    }
    body.exists(&ps.scope_vec())
}

/// The partially abstracted system `(α(S), α(I ∧ S), {α^τ(r)})`.
pub fn abstract_system(ts: &TransitionSystem, ps: &PredicateSet) -> Result<TransitionSystem, Error> {
    for b in ps.bool_vars() {
        if ts.var(b.name()).is_some() {
            return Err(Error::Kind(format!(
                "predicate variable `{b}` clashes with a model variable"
            )));
        }
    }
    let scope = ps.scope();
    let mut vars: Vec<VarId> = ts.vars.iter().filter(|v| !scope.contains(v)).cloned().collect();
    vars.extend(ps.bool_vars());
    let enums = ts
        .enums
        .iter()
        .filter(|(name, _)| vars.iter().any(|v| v.name() == name.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(TransitionSystem {
        name: ts.name.clone(),
        vars,
        enums,
        constants: ts.constants.clone(),
        restriction: alpha_state(&ts.restriction, ps),
        init: alpha_state(&ts.init.and(&ts.restriction), ps),
        transitions: ts
            .transitions
            .iter()
            .map(|t| crate::model::Transition {
                label: t.label.clone(),
                relation: alpha_trans(&t.relation, ps),
            })
            .collect(),
    })
}

/// Rewrites property leaves over abstracted variables into boolean
/// combinations of predicate variables.
///
/// Every atom of a leaf that mentions `V(φ)` must be constant on each sign
/// region of the predicates sharing its variables (within `restriction`);
/// otherwise the whole leaf is tried as a unit before giving up.
pub fn abstract_property(
    p: &CtlProperty,
    ps: &PredicateSet,
    restriction: &Formula,
) -> Result<CtlProperty, Error> {
    let scope = ps.scope();
    p.map_leaves(&mut |leaf| {
        if leaf.vars().is_disjoint(&scope) {
            return Ok(leaf.clone());
        }
        abstract_atomwise(leaf, ps, restriction).or_else(|e| abstract_leaf(leaf, ps, restriction).ok_or(e))
    })
}

fn abstract_atomwise(leaf: &Formula, ps: &PredicateSet, restriction: &Formula) -> Result<Formula, Error> {
    let scope = ps.scope();
    let mut cache: BTreeMap<crate::formula::Atom, Formula> = BTreeMap::new();
    let mut cubes = Vec::new();
    for c in leaf.cubes() {
        let mut parts = Vec::new();
        for a in c.atoms() {
            let f = Formula::atom(a.clone());
            if f.vars().is_disjoint(&scope) {
                parts.push(f);
                continue;
            }
            if !cache.contains_key(a) {
                cache.insert(a.clone(), abstract_atom(&f, ps, restriction)?);
            }
            parts.push(cache[a].clone());
        }
        cubes.push(Formula::and_all(parts));
    }
    Ok(Formula::or_all(cubes))
}

/// Whole-leaf rewrite: on each sign region the leaf must not depend on the
/// abstracted variables, i.e. its existential and universal projections
/// over `V(φ)` agree.
fn abstract_leaf(leaf: &Formula, ps: &PredicateSet, restriction: &Formula) -> Option<Formula> {
    let vars = leaf.vars();
    let relevant: Vec<usize> = (0..ps.len())
        .filter(|&i| !ps.get(i).scope.is_disjoint(&vars))
        .collect();
    let sub = ps.subset(&relevant);
    let scope = sub.scope_vec();
    let bs = sub.bool_vars();
    let neg = leaf.not();
    let mut out = Vec::new();
    for (signs, region) in regions(restriction, &polarities(&sub, false)) {
        let some = region.and(leaf).exists(&scope);
        if some.is_false() {
            continue;
        }
        if some.and(&region.and(&neg).exists(&scope)).satisfiable() {
            return None;
        }
        out.push(sign_cube(&bs, &signs).and(&some));
    }
    Some(Formula::or_all(out))
}

fn abstract_atom(atom: &Formula, ps: &PredicateSet, restriction: &Formula) -> Result<Formula, Error> {
    let vars = atom.vars();
    let relevant: Vec<usize> = (0..ps.len())
        .filter(|&i| !ps.get(i).scope.is_disjoint(&vars))
        .collect();
    let sub = ps.subset(&relevant);
    if !vars.is_subset(&sub.scope()) {
        return Err(Error::Unexpressible(atom.to_string()));
    }
    let bs = sub.bool_vars();
    let not_atom = atom.not();
    let mut included = BTreeSet::new();
    let mut feasible = BTreeSet::new();
    for (signs, region) in regions(restriction, &polarities(&sub, false)) {
        feasible.insert(signs.clone());
        if !region.and(&not_atom).satisfiable() {
            included.insert(signs);
        } else if region.and(atom).satisfiable() {
            return Err(Error::Unexpressible(atom.to_string()));
        }
    }
    let infeasible = |s: &Vec<bool>| !feasible.contains(s);
    Ok(minimize_regions(&bs, &included, infeasible))
}

/// Greedy literal dropping over a set of boolean regions, treating
/// infeasible regions as don't-cares.
fn minimize_regions(
    vars: &[VarId],
    included: &BTreeSet<Vec<bool>>,
    dont_care: impl Fn(&Vec<bool>) -> bool,
) -> Formula {
    let ok = |pattern: &[Option<bool>]| -> bool {
        let free: Vec<usize> = (0..pattern.len()).filter(|&i| pattern[i].is_none()).collect();
        (0..1u64 << free.len()).all(|mask| {
            let mut full: Vec<bool> = pattern.iter().map(|x| x.unwrap_or(false)).collect();
            for (k, &i) in free.iter().enumerate() {
                full[i] = mask >> k & 1 == 1;
            }
            included.contains(&full) || dont_care(&full)
        })
    };
    let mut cubes: Vec<Vec<Option<bool>>> = Vec::new();
    for r in included {
        let mut pat: Vec<Option<bool>> = r.iter().map(|&b| Some(b)).collect();
        for i in 0..pat.len() {
            let saved = pat[i].take();
            if !ok(&pat) {
                pat[i] = saved;
            }
        }
        cubes.push(pat);
    }
    Formula::or_all(cubes.into_iter().map(|pat| {
        Formula::and_all(
            vars.iter()
                .zip(pat)
                .filter_map(|(v, s)| s.map(|s| Formula::boolean(v.clone(), s))),
        )
    }))
}

/// `C(φ)`: every leaf `a` becomes `γ(a)`.
pub fn concretize_property(p: &CtlProperty, ps: &PredicateSet) -> CtlProperty {
    p.map_leaves(&mut |leaf| Ok(gamma(leaf, ps)))
        .expect("concretization is total")
}
