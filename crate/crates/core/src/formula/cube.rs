use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::atom::{Atom, Lit};
use super::linear::LinExpr;
use super::VarId;

/// A conjunction of atoms in canonical form.
///
/// Invariants: atoms are sorted and deduplicated; there are no complementary
/// boolean literals; linear atoms over the same variable part are merged into
/// at most one lower bound, one upper bound, or one equality; bounds are not
/// contradictory. The empty cube is TRUE.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cube {
    atoms: Vec<Atom>,
}

#[derive(Default)]
struct Bounds {
    lo: Option<BigInt>,
    hi: Option<BigInt>,
}

impl Cube {
    pub fn top() -> Cube {
        Cube::default()
    }

    /// Normalizes a conjunction; `None` if it is syntactically contradictory.
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Option<Cube> {
        let mut bools: BTreeMap<VarId, bool> = BTreeMap::new();
        // keyed by the variable part with a positive leading coefficient
        let mut bounds: BTreeMap<LinExpr, Bounds> = BTreeMap::new();
        let mut divs: BTreeMap<(BigInt, LinExpr), bool> = BTreeMap::new();

        for atom in atoms {
            match atom {
                Atom::Bool { var, positive } => {
                    if let Some(p) = bools.insert(var, positive) {
                        if p != positive {
                            return None;
                        }
                    }
                }
                Atom::Le(e) => {
                    let c = e.constant_part().clone();
                    if e.leading_negative() {
                        // -h + c <= 0  ⇔  h >= c
                        let b = bounds.entry(e.homogeneous().neg()).or_default();
                        b.lo = Some(match b.lo.take() {
                            Some(l) => l.max(c),
                            None => c,
                        });
                    } else {
                        // h + c <= 0  ⇔  h <= -c
                        let b = bounds.entry(e.homogeneous()).or_default();
                        let c = -c;
                        b.hi = Some(match b.hi.take() {
                            Some(h) => h.min(c),
                            None => c,
                        });
                    }
                }
                Atom::Eq(e) => {
                    let v = -e.constant_part();
                    let b = bounds.entry(e.homogeneous()).or_default();
                    b.lo = Some(match b.lo.take() {
                        Some(l) => l.max(v.clone()),
                        None => v.clone(),
                    });
                    b.hi = Some(match b.hi.take() {
                        Some(h) => h.min(v),
                        None => v,
                    });
                }
                Atom::Div {
                    modulus,
                    expr,
                    positive,
                } => {
                    if let Some(p) = divs.insert((modulus, expr), positive) {
                        if p != positive {
                            return None;
                        }
                    }
                }
            }
        }

        let mut out = Vec::with_capacity(bools.len() + bounds.len() + divs.len());
        out.extend(
            bools
                .into_iter()
                .map(|(var, positive)| Atom::Bool { var, positive }),
        );
        for (h, b) in bounds {
            match (b.lo, b.hi) {
                (Some(l), Some(u)) if l > u => return None,
                (Some(l), Some(u)) if l == u => out.push(Atom::Eq(h.add_constant(&-l))),
                (lo, hi) => {
                    if let Some(l) = lo {
                        out.push(Atom::Le(h.neg().add_constant(&l)));
                    }
                    if let Some(u) = hi {
                        out.push(Atom::Le(h.add_constant(&-u)));
                    }
                }
            }
        }
        out.extend(
            divs.into_iter()
                .map(|((modulus, expr), positive)| Atom::Div {
                    modulus,
                    expr,
                    positive,
                }),
        );
        out.sort();
        Some(Cube { atoms: out })
    }

    /// Normalizes a conjunction of literals; `None` if contradictory.
    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Option<Cube> {
        let mut atoms = Vec::new();
        for l in lits {
            match l {
                Lit::True => {}
                Lit::False => return None,
                Lit::Atom(a) => atoms.push(a),
            }
        }
        Cube::from_atoms(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn and(&self, other: &Cube) -> Option<Cube> {
        if other.atoms.is_empty() {
            return Some(self.clone());
        }
        if self.atoms.is_empty() {
            return Some(other.clone());
        }
        Cube::from_atoms(self.atoms.iter().chain(other.atoms.iter()).cloned())
    }

    pub fn with(&self, atom: Atom) -> Option<Cube> {
        Cube::from_atoms(self.atoms.iter().cloned().chain(std::iter::once(atom)))
    }

    /// Syntactic containment: every atom of `self` occurs in `other`, so
    /// `other` implies `self`.
    pub fn is_subset_of(&self, other: &Cube) -> bool {
        if self.atoms.len() > other.atoms.len() {
            return false;
        }
        let mut j = 0;
        for a in &self.atoms {
            while j < other.atoms.len() && other.atoms[j] < *a {
                j += 1;
            }
            if j == other.atoms.len() || other.atoms[j] != *a {
                return false;
            }
            j += 1;
        }
        true
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self.atoms.iter().flat_map(|a| a.vars()).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        self.atoms.iter().any(|a| a.mentions(v))
    }

    pub fn bool_value(&self, v: &VarId) -> Option<bool> {
        self.atoms.iter().find_map(|a| match a {
            Atom::Bool { var, positive } if var == v => Some(*positive),
            _ => None,
        })
    }

    /// Splits into boolean literals and arithmetic atoms.
    pub fn split_bool(&self) -> (Vec<&Atom>, Vec<&Atom>) {
        self.atoms.iter().partition(|a| a.is_bool())
    }

    /// Applies a literal-level rewrite to every atom and renormalizes.
    pub fn map_atoms(&self, f: impl Fn(&Atom) -> Lit) -> Option<Cube> {
        Cube::from_lits(self.atoms.iter().map(f))
    }

    pub fn eval(&self, value: &impl Fn(&VarId) -> Option<i64>) -> Option<bool> {
        for a in &self.atoms {
            if !a.eval(value)? {
                return Some(false);
            }
        }
        Some(true)
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::atom::CmpOp;

    fn cmp(v: &VarId, op: CmpOp, c: i64) -> Lit {
        Atom::compare(&LinExpr::var(v.clone()), op, &LinExpr::constant(c))
            .pop()
            .unwrap()
    }

    #[test]
    fn conflicting_equalities_are_dropped() {
        let x = VarId::int("x");
        assert!(Cube::from_lits([cmp(&x, CmpOp::Eq, 1), cmp(&x, CmpOp::Eq, 2)]).is_none());
    }

    #[test]
    fn contradictory_bounds_are_dropped() {
        let x = VarId::int("x");
        assert!(Cube::from_lits([cmp(&x, CmpOp::Ge, 0), cmp(&x, CmpOp::Le, -1)]).is_none());
    }

    #[test]
    fn touching_bounds_become_equality() {
        let x = VarId::int("x");
        let c = Cube::from_lits([cmp(&x, CmpOp::Ge, 3), cmp(&x, CmpOp::Le, 3)]).unwrap();
        assert_eq!(c.to_string(), "x = 3");
    }

    #[test]
    fn redundant_bounds_merge() {
        let x = VarId::int("x");
        let c = Cube::from_lits([cmp(&x, CmpOp::Le, 5), cmp(&x, CmpOp::Le, 3)]).unwrap();
        assert_eq!(c.to_string(), "x <= 3");
    }

    #[test]
    fn complementary_literals_conflict() {
        let b = VarId::boolean("b");
        assert!(Cube::from_atoms([Atom::boolean(b.clone(), true), Atom::boolean(b, false)]).is_none());
    }

    #[test]
    fn subset_means_weaker() {
        let x = VarId::int("x");
        let b = VarId::boolean("b");
        let weak = Cube::from_lits([cmp(&x, CmpOp::Le, 3)]).unwrap();
        let strong =
            Cube::from_lits([cmp(&x, CmpOp::Le, 3), Lit::Atom(Atom::boolean(b, true))]).unwrap();
        assert!(weak.is_subset_of(&strong));
        assert!(!strong.is_subset_of(&weak));
    }
}
