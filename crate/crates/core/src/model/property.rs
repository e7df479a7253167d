use std::collections::BTreeSet;
use std::fmt;

use super::parse;
use super::template::Scope;
use super::TransitionSystem;
use crate::formula::{Formula, VarId};
use crate::Error;

/// A CTL formula whose leaves are quantifier-free state formulas.
///
/// Temporal-free subtrees collapse into a single `Atom` leaf when built by
/// the parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CtlProperty {
    Atom(Formula),
    Not(Box<CtlProperty>),
    And(Box<CtlProperty>, Box<CtlProperty>),
    Or(Box<CtlProperty>, Box<CtlProperty>),
    AX(Box<CtlProperty>),
    AF(Box<CtlProperty>),
    AG(Box<CtlProperty>),
    AU(Box<CtlProperty>, Box<CtlProperty>),
    EX(Box<CtlProperty>),
    EF(Box<CtlProperty>),
    EG(Box<CtlProperty>),
    EU(Box<CtlProperty>, Box<CtlProperty>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fragment {
    /// No temporal operator.
    State,
    Actl,
    Ectl,
    Mixed,
}

use CtlProperty as P;

fn bx(p: CtlProperty) -> Box<CtlProperty> {
    Box::new(p)
}

impl CtlProperty {
    pub fn parse(text: &str, ts: &TransitionSystem) -> Result<CtlProperty, Error> {
        let ast = parse::parse_expr(text)?;
        Scope::for_system(ts).property(&ast)
    }

    pub fn ag(f: Formula) -> CtlProperty {
        P::AG(bx(P::Atom(f)))
    }

    /// Negation normal form: negations only on leaves, where they are
    /// absorbed into the leaf formula.
    pub fn nnf(&self) -> CtlProperty {
        self.nnf_signed(true)
    }

    /// NNF of the negation.
    pub fn negated(&self) -> CtlProperty {
        self.nnf_signed(false)
    }

    fn nnf_signed(&self, pos: bool) -> CtlProperty {
        let n = |p: &CtlProperty, s: bool| bx(p.nnf_signed(s));
        match (self, pos) {
            (P::Atom(f), true) => P::Atom(f.clone()),
            (P::Atom(f), false) => P::Atom(f.not()),
            (P::Not(p), s) => p.nnf_signed(!s),
            (P::And(a, b), true) | (P::Or(a, b), false) => P::And(n(a, pos), n(b, pos)),
            (P::Or(a, b), true) | (P::And(a, b), false) => P::Or(n(a, pos), n(b, pos)),
            (P::AX(a), true) => P::AX(n(a, true)),
            (P::AX(a), false) => P::EX(n(a, false)),
            (P::EX(a), true) => P::EX(n(a, true)),
            (P::EX(a), false) => P::AX(n(a, false)),
            (P::AF(a), true) => P::AF(n(a, true)),
            (P::AF(a), false) => P::EG(n(a, false)),
            (P::EG(a), true) => P::EG(n(a, true)),
            (P::EG(a), false) => P::AF(n(a, false)),
            (P::AG(a), true) => P::AG(n(a, true)),
            (P::AG(a), false) => P::EF(n(a, false)),
            (P::EF(a), true) => P::EF(n(a, true)),
            (P::EF(a), false) => P::AG(n(a, false)),
            (P::AU(a, b), true) => P::AU(n(a, true), n(b, true)),
            (P::EU(a, b), true) => P::EU(n(a, true), n(b, true)),
            // ¬A[a U b] = E[¬b U (¬a ∧ ¬b)] ∨ EG ¬b
            (P::AU(a, b), false) => P::Or(
                bx(P::EU(
                    n(b, false),
                    bx(P::And(n(a, false), n(b, false))),
                )),
                bx(P::EG(n(b, false))),
            ),
            // ¬E[a U b] = A[¬b U (¬a ∧ ¬b)] ∨ AG ¬b
            (P::EU(a, b), false) => P::Or(
                bx(P::AU(
                    n(b, false),
                    bx(P::And(n(a, false), n(b, false))),
                )),
                bx(P::AG(n(b, false))),
            ),
        }
    }

    /// Fragment of the NNF of this property.
    pub fn fragment(&self) -> Fragment {
        let (a, e) = self.nnf().quantifiers();
        match (a, e) {
            (false, false) => Fragment::State,
            (true, false) => Fragment::Actl,
            (false, true) => Fragment::Ectl,
            (true, true) => Fragment::Mixed,
        }
    }

    fn quantifiers(&self) -> (bool, bool) {
        let or = |x: (bool, bool), y: (bool, bool)| (x.0 || y.0, x.1 || y.1);
        match self {
            P::Atom(_) => (false, false),
            P::Not(a) => a.quantifiers(),
            P::And(a, b) | P::Or(a, b) => or(a.quantifiers(), b.quantifiers()),
            P::AX(a) | P::AF(a) | P::AG(a) => or((true, false), a.quantifiers()),
            P::EX(a) | P::EF(a) | P::EG(a) => or((false, true), a.quantifiers()),
            P::AU(a, b) => or((true, false), or(a.quantifiers(), b.quantifiers())),
            P::EU(a, b) => or((false, true), or(a.quantifiers(), b.quantifiers())),
        }
    }

    /// Applies a fallible rewrite to every leaf.
    pub fn map_leaves(
        &self,
        f: &mut impl FnMut(&Formula) -> Result<Formula, Error>,
    ) -> Result<CtlProperty, Error> {
        let mut m = |p: &CtlProperty| p.map_leaves(f).map(bx);
        Ok(match self {
            P::Atom(x) => P::Atom(f(x)?),
            P::Not(a) => P::Not(m(a)?),
            P::And(a, b) => P::And(m(a)?, m(b)?),
            P::Or(a, b) => P::Or(m(a)?, m(b)?),
            P::AX(a) => P::AX(m(a)?),
            P::AF(a) => P::AF(m(a)?),
            P::AG(a) => P::AG(m(a)?),
            P::AU(a, b) => P::AU(m(a)?, m(b)?),
            P::EX(a) => P::EX(m(a)?),
            P::EF(a) => P::EF(m(a)?),
            P::EG(a) => P::EG(m(a)?),
            P::EU(a, b) => P::EU(m(a)?, m(b)?),
        })
    }

    pub fn leaves(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            P::Atom(f) => out.push(f),
            P::Not(a) | P::AX(a) | P::AF(a) | P::AG(a) | P::EX(a) | P::EF(a) | P::EG(a) => {
                a.collect_leaves(out)
            }
            P::And(a, b) | P::Or(a, b) | P::AU(a, b) | P::EU(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    /// Variables of all leaves (the property scope).
    pub fn vars(&self) -> BTreeSet<VarId> {
        self.leaves().into_iter().flat_map(|f| f.vars()).collect()
    }

    /// Leaf-wise logical equivalence with the same temporal skeleton.
    pub fn equivalent(&self, other: &CtlProperty) -> bool {
        match (self, other) {
            (P::Atom(a), P::Atom(b)) => a.equivalent(b),
            (P::Not(a), P::Not(b))
            | (P::AX(a), P::AX(b))
            | (P::AF(a), P::AF(b))
            | (P::AG(a), P::AG(b))
            | (P::EX(a), P::EX(b))
            | (P::EF(a), P::EF(b))
            | (P::EG(a), P::EG(b)) => a.equivalent(b),
            (P::And(a, b), P::And(c, d))
            | (P::Or(a, b), P::Or(c, d))
            | (P::AU(a, b), P::AU(c, d))
            | (P::EU(a, b), P::EU(c, d)) => a.equivalent(c) && b.equivalent(d),
            _ => false,
        }
    }
}

impl fmt::Display for CtlProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P::Atom(x) => write!(f, "({x})"),
            P::Not(a) => write!(f, "!{a}"),
            P::And(a, b) => write!(f, "({a} & {b})"),
            P::Or(a, b) => write!(f, "({a} | {b})"),
            P::AX(a) => write!(f, "AX({a})"),
            P::AF(a) => write!(f, "AF({a})"),
            P::AG(a) => write!(f, "AG({a})"),
            P::EX(a) => write!(f, "EX({a})"),
            P::EF(a) => write!(f, "EF({a})"),
            P::EG(a) => write!(f, "EG({a})"),
            P::AU(a, b) => write!(f, "A[{a} U {b}]"),
            P::EU(a, b) => write!(f, "E[{a} U {b}]"),
        }
    }
}
