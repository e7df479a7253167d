//! Quantifier-free formulas over linear integer arithmetic and booleans,
//! kept in disjunctive normal form.

mod atom;
mod cube;
mod linear;
pub mod qe;
mod var;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use atom::{Atom, CmpOp, Lit};
pub use cube::Cube;
pub use linear::LinExpr;
pub use var::{VarId, VarKind};

use crate::Error;

/// A disjunction of cubes. The empty disjunction is FALSE; a formula
/// containing the empty cube is TRUE and is stored as exactly that cube.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Formula {
    cubes: Vec<Cube>,
}

impl Formula {
    pub fn tt() -> Formula {
        Formula {
            cubes: vec![Cube::top()],
        }
    }

    pub fn ff() -> Formula {
        Formula { cubes: Vec::new() }
    }

    pub fn from_bool(b: bool) -> Formula {
        if b {
            Formula::tt()
        } else {
            Formula::ff()
        }
    }

    /// Builds a formula from cubes, normalizing (sorting, deduplicating and
    /// dropping syntactically subsumed cubes).
    pub fn from_cubes(cubes: impl IntoIterator<Item = Cube>) -> Formula {
        let mut cubes: Vec<Cube> = cubes.into_iter().collect();
        if cubes.iter().any(Cube::is_empty) {
            return Formula::tt();
        }
        cubes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        cubes.dedup();
        let mut kept: Vec<Cube> = Vec::with_capacity(cubes.len());
        for c in cubes {
            if !kept.iter().any(|k| k.is_subset_of(&c)) {
                kept.push(c);
            }
        }
        kept.sort();
        Formula { cubes: kept }
    }

    pub fn cube(c: Cube) -> Formula {
        Formula::from_cubes([c])
    }

    pub fn lit(l: Lit) -> Formula {
        match l {
            Lit::True => Formula::tt(),
            Lit::False => Formula::ff(),
            Lit::Atom(a) => Formula::atom(a),
        }
    }

    pub fn atom(a: Atom) -> Formula {
        Formula::cube(Cube::from_atoms([a]).expect("single atom is consistent"))
    }

    pub fn boolean(v: VarId, positive: bool) -> Formula {
        Formula::atom(Atom::boolean(v, positive))
    }

    /// `lhs op rhs`; `≠` becomes a two-cube disjunction.
    pub fn cmp(lhs: &LinExpr, op: CmpOp, rhs: &LinExpr) -> Formula {
        Formula::or_all(Atom::compare(lhs, op, rhs).into_iter().map(Formula::lit))
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn is_true(&self) -> bool {
        self.cubes.len() == 1 && self.cubes[0].is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Returns the single atom if the formula is exactly one atom.
    pub fn as_atom(&self) -> Option<&Atom> {
        match self.cubes.as_slice() {
            [c] if c.len() == 1 => c.atoms().first(),
            _ => None,
        }
    }

    pub fn or(&self, other: &Formula) -> Formula {
        if self.is_false() {
            return other.clone();
        }
        if other.is_false() {
            return self.clone();
        }
        Formula::from_cubes(self.cubes.iter().chain(other.cubes.iter()).cloned())
    }

    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::from_cubes(fs.into_iter().flat_map(|f| f.cubes))
    }

    /// Conjunction; product cubes that are unsatisfiable are dropped.
    pub fn and(&self, other: &Formula) -> Formula {
        if self.is_true() {
            return other.clone();
        }
        if other.is_true() {
            return self.clone();
        }
        let mut out = Vec::new();
        for a in &self.cubes {
            for b in &other.cubes {
                if let Some(c) = a.and(b) {
                    if qe::cube_sat(&c) {
                        out.push(c);
                    }
                }
            }
        }
        Formula::from_cubes(out)
    }

    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut acc = Formula::tt();
        for f in fs {
            acc = acc.and(&f);
            if acc.is_false() {
                break;
            }
        }
        acc
    }

    pub fn not(&self) -> Formula {
        let mut acc = vec![Cube::top()];
        for cube in &self.cubes {
            let negs: Vec<Atom> = cube.atoms().iter().flat_map(|a| a.negate()).collect();
            let mut next = Vec::new();
            for c in &acc {
                for n in &negs {
                    if let Some(d) = c.with(n.clone()) {
                        if qe::cube_sat(&d) {
                            next.push(d);
                        }
                    }
                }
            }
            acc = Formula::from_cubes(next).cubes;
            if acc.is_empty() {
                break;
            }
        }
        Formula::from_cubes(acc)
    }

    pub fn implies(&self, other: &Formula) -> Formula {
        self.not().or(other)
    }

    pub fn iff(&self, other: &Formula) -> Formula {
        self.and(other).or(&self.not().and(&other.not()))
    }

    /// `∃vars. self`.
    pub fn exists(&self, vars: &[VarId]) -> Formula {
        if vars.is_empty() {
            return self.clone();
        }
        Formula::from_cubes(
            self.cubes
                .iter()
                .flat_map(|c| {
                    if vars.iter().any(|v| c.mentions(v)) {
                        qe::eliminate_cube(c, vars)
                    } else {
                        vec![c.clone()]
                    }
                })
                .filter(qe::cube_sat),
        )
    }

    /// Renames variables; fails if two occurring variables map to the same
    /// target.
    pub fn rename(&self, mapping: &BTreeMap<VarId, VarId>) -> Result<Formula, Error> {
        let occurring = self.vars();
        let mut seen: BTreeMap<VarId, VarId> = BTreeMap::new();
        for v in &occurring {
            let t = mapping.get(v).cloned().unwrap_or_else(|| v.clone());
            if let Some(prev) = seen.insert(t.clone(), v.clone()) {
                return Err(Error::RenameCollision {
                    first: prev.to_string(),
                    second: v.to_string(),
                    target: t.to_string(),
                });
            }
        }
        Ok(self.rename_with(&|v| mapping.get(v).cloned().unwrap_or_else(|| v.clone())))
    }

    /// Renames with a function assumed injective on the occurring variables.
    pub fn rename_with(&self, f: &impl Fn(&VarId) -> VarId) -> Formula {
        Formula::from_cubes(
            self.cubes
                .iter()
                .filter_map(|c| c.map_atoms(|a| a.rename(f))),
        )
    }

    /// The Range operator: every current-state variable becomes next-state.
    pub fn to_next(&self) -> Formula {
        self.rename_with(&|v| if v.is_next() { v.clone() } else { v.primed() })
    }

    pub fn to_current(&self) -> Formula {
        self.rename_with(&|v| v.unprimed())
    }

    /// Replaces boolean variables by formulas.
    pub fn substitute_bools(&self, map: &BTreeMap<VarId, Formula>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let mut neg_cache: BTreeMap<&VarId, Formula> = BTreeMap::new();
        for (v, f) in map {
            neg_cache.insert(v, f.not());
        }
        Formula::or_all(self.cubes.iter().map(|c| {
            let mut plain = Vec::new();
            let mut parts = Vec::new();
            for a in c.atoms() {
                match a {
                    Atom::Bool { var, positive } if map.contains_key(var) => {
                        parts.push(if *positive {
                            map[var].clone()
                        } else {
                            neg_cache[var].clone()
                        });
                    }
                    _ => plain.push(a.clone()),
                }
            }
            let base = Formula::cube(Cube::from_atoms(plain).expect("sub-cube is consistent"));
            Formula::and_all(std::iter::once(base).chain(parts))
        }))
    }

    /// Replaces an integer variable by a linear expression.
    pub fn substitute(&self, v: &VarId, e: &LinExpr) -> Formula {
        Formula::from_cubes(
            self.cubes
                .iter()
                .filter_map(|c| c.map_atoms(|a| a.substitute(v, e)))
                .filter(qe::cube_sat),
        )
    }

    pub fn satisfiable(&self) -> bool {
        self.cubes.iter().any(qe::cube_sat)
    }

    /// Validity of `self ⟹ other`.
    pub fn entails(&self, other: &Formula) -> bool {
        if other.is_true() || self.is_false() {
            return true;
        }
        self.cubes.iter().all(|c| cube_entails(c, &other.cubes))
    }

    pub fn equivalent(&self, other: &Formula) -> bool {
        self.entails(other) && other.entails(self)
    }

    /// Drops unsatisfiable cubes and cubes implied by another cube.
    pub fn simplify(&self) -> Formula {
        let sat: Vec<Cube> = self.cubes.iter().filter(|c| qe::cube_sat(c)).cloned().collect();
        let mut keep = vec![true; sat.len()];
        for i in 0..sat.len() {
            for j in 0..sat.len() {
                if i != j && keep[j] && cube_implies_cube(&sat[i], &sat[j]) {
                    // keep the earlier of two equivalent cubes
                    if !(cube_implies_cube(&sat[j], &sat[i]) && j > i) {
                        keep[i] = false;
                        break;
                    }
                }
            }
        }
        Formula::from_cubes(
            sat.into_iter()
                .zip(keep)
                .filter_map(|(c, k)| k.then_some(c)),
        )
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.cubes.iter().flat_map(|c| c.vars()).collect()
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        self.cubes.iter().any(|c| c.mentions(v))
    }

    /// All atoms occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.cubes
            .iter()
            .flat_map(|c| c.atoms().iter().cloned())
            .collect()
    }

    pub fn eval(&self, value: &impl Fn(&VarId) -> Option<i64>) -> Option<bool> {
        let mut any = false;
        for c in &self.cubes {
            if c.eval(value)? {
                any = true;
            }
        }
        Some(any)
    }
}

fn cube_implies_cube(c: &Cube, d: &Cube) -> bool {
    if d.is_subset_of(c) {
        return true;
    }
    d.atoms().iter().all(|a| cube_implies_atom(c, a))
}

fn cube_implies_atom(c: &Cube, a: &Atom) -> bool {
    c.atoms().contains(a)
        || a
            .negate()
            .into_iter()
            .all(|n| c.with(n).is_none_or(|x| !qe::cube_sat(&x)))
}

/// Whether `c ⟹ ⋁ ds`.
fn cube_entails(c: &Cube, ds: &[Cube]) -> bool {
    if !qe::cube_sat(c) {
        return true;
    }
    if ds.iter().any(|d| d.is_subset_of(c)) {
        return true;
    }
    // cubes that are syntactically inconsistent with c cannot help cover it
    let relevant: Vec<&Cube> = ds.iter().filter(|d| c.and(d).is_some()).collect();
    if relevant.iter().any(|d| cube_implies_cube(c, d)) {
        return true;
    }
    !escapes(c, &relevant)
}

/// Searches for a satisfiable refinement of `cur` that avoids every cube in
/// `rest`.
fn escapes(cur: &Cube, rest: &[&Cube]) -> bool {
    let Some((d, tail)) = rest.split_first() else {
        return qe::cube_sat(cur);
    };
    if cur.and(d).is_none() {
        return escapes(cur, tail);
    }
    for a in d.atoms() {
        if cur.atoms().contains(a) {
            continue;
        }
        for n in a.negate() {
            if let Some(next) = cur.with(n) {
                if qe::cube_sat(&next) && escapes(&next, tail) {
                    return true;
                }
            }
        }
    }
    false
}

impl From<bool> for Formula {
    fn from(b: bool) -> Formula {
        Formula::from_bool(b)
    }
}

impl fmt::Display for Formula {
    /// Stable sorted DNF text in model syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cubes.is_empty() {
            return write!(f, "false");
        }
        let many = self.cubes.len() > 1;
        for (i, c) in self.cubes.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            if many && c.len() > 1 {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}
