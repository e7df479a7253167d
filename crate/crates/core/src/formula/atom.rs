use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linear::{write_sum, LinExpr};
use super::VarId;

/// Comparison operators accepted by the constructors. `Ne` never survives
/// normalization: it is split into two strict inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// A normalized atomic constraint.
///
/// Linear atoms are stored as `e ≤ 0` or `e = 0` with coprime variable
/// coefficients; equalities additionally have a positive leading
/// coefficient. Divisibility atoms only arise inside integer elimination.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Bool { var: VarId, positive: bool },
    Le(LinExpr),
    Eq(LinExpr),
    Div { modulus: BigInt, expr: LinExpr, positive: bool },
}

/// Result of normalizing a candidate atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lit {
    True,
    False,
    Atom(Atom),
}

impl Atom {
    pub fn boolean(var: VarId, positive: bool) -> Atom {
        Atom::Bool { var, positive }
    }

    /// `e ≤ 0`, normalized.
    pub fn le(e: LinExpr) -> Lit {
        if e.is_constant() {
            return if e.constant_part() <= &BigInt::zero() {
                Lit::True
            } else {
                Lit::False
            };
        }
        let g = e.coeff_gcd();
        if g.is_one() {
            return Lit::Atom(Atom::Le(e));
        }
        let terms = e.terms().iter().map(|(v, c)| (v.clone(), c / &g)).collect();
        let k = e.constant_part().div_ceil(&g);
        Lit::Atom(Atom::Le(LinExpr::from_terms(terms, k)))
    }

    /// `e = 0`, normalized.
    pub fn eq(e: LinExpr) -> Lit {
        if e.is_constant() {
            return if e.constant_part().is_zero() {
                Lit::True
            } else {
                Lit::False
            };
        }
        let g = e.coeff_gcd();
        if !e.constant_part().is_multiple_of(&g) {
            return Lit::False;
        }
        let mut e = if g.is_one() {
            e
        } else {
            let terms = e.terms().iter().map(|(v, c)| (v.clone(), c / &g)).collect();
            LinExpr::from_terms(terms, e.constant_part() / &g)
        };
        if e.leading_negative() {
            e = e.neg();
        }
        Lit::Atom(Atom::Eq(e))
    }

    /// `modulus | e` (or its negation), normalized.
    pub fn divides(modulus: BigInt, e: LinExpr, positive: bool) -> Lit {
        let m = modulus.abs();
        assert!(!m.is_zero(), "divisibility by zero");
        let holds = |b: bool| if b == positive { Lit::True } else { Lit::False };
        if m.is_one() {
            return holds(true);
        }
        let terms: Vec<(VarId, BigInt)> = e
            .terms()
            .iter()
            .map(|(v, c)| (v.clone(), c.mod_floor(&m)))
            .collect();
        let e = LinExpr::from_terms(terms, e.constant_part().mod_floor(&m));
        if e.is_constant() {
            return holds(e.constant_part().is_zero());
        }
        let h = e.coeff_gcd().gcd(&m);
        if !e.constant_part().is_multiple_of(&h) {
            return holds(false);
        }
        if h.is_one() {
            return Lit::Atom(Atom::Div {
                modulus: m,
                expr: e,
                positive,
            });
        }
        let terms = e.terms().iter().map(|(v, c)| (v.clone(), c / &h)).collect();
        let e = LinExpr::from_terms(terms, e.constant_part() / &h);
        Atom::divides(m / h, e, positive)
    }

    /// `lhs op rhs` as a disjunction of normalized atoms (`≠` yields two).
    pub fn compare(lhs: &LinExpr, op: CmpOp, rhs: &LinExpr) -> Vec<Lit> {
        let d = lhs.sub(rhs);
        let one = BigInt::one();
        match op {
            CmpOp::Le => vec![Atom::le(d)],
            CmpOp::Lt => vec![Atom::le(d.add_constant(&one))],
            CmpOp::Ge => vec![Atom::le(d.neg())],
            CmpOp::Gt => vec![Atom::le(d.neg().add_constant(&one))],
            CmpOp::Eq => vec![Atom::eq(d)],
            CmpOp::Ne => vec![
                Atom::le(d.add_constant(&one)),
                Atom::le(d.neg().add_constant(&one)),
            ],
        }
    }

    /// The negation as a disjunction of atoms.
    pub fn negate(&self) -> Vec<Atom> {
        let one = BigInt::one();
        let lits = match self {
            Atom::Bool { var, positive } => {
                return vec![Atom::Bool {
                    var: var.clone(),
                    positive: !positive,
                }]
            }
            Atom::Le(e) => vec![Atom::le(e.neg().add_constant(&one))],
            Atom::Eq(e) => vec![
                Atom::le(e.add_constant(&one)),
                Atom::le(e.neg().add_constant(&one)),
            ],
            Atom::Div {
                modulus,
                expr,
                positive,
            } => vec![Atom::divides(modulus.clone(), expr.clone(), !positive)],
        };
        lits.into_iter()
            .filter_map(|l| match l {
                Lit::Atom(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Atom::Bool { .. })
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Atom::Le(_) | Atom::Eq(_))
    }

    pub fn linear_expr(&self) -> Option<&LinExpr> {
        match self {
            Atom::Le(e) | Atom::Eq(e) => Some(e),
            Atom::Div { expr, .. } => Some(expr),
            Atom::Bool { .. } => None,
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Atom::Bool { var, .. } => vec![var.clone()],
            Atom::Le(e) | Atom::Eq(e) | Atom::Div { expr: e, .. } => e.vars().cloned().collect(),
        }
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        match self {
            Atom::Bool { var, .. } => var == v,
            Atom::Le(e) | Atom::Eq(e) | Atom::Div { expr: e, .. } => e.mentions(v),
        }
    }

    /// Coefficient of an integer variable (zero if absent or boolean atom).
    pub fn coeff(&self, v: &VarId) -> BigInt {
        self.linear_expr()
            .and_then(|e| e.coeff(v).cloned())
            .unwrap_or_else(BigInt::zero)
    }

    /// Applies a function to the linear part, renormalizing.
    pub fn map_expr(&self, f: impl Fn(&LinExpr) -> LinExpr) -> Lit {
        match self {
            Atom::Bool { .. } => Lit::Atom(self.clone()),
            Atom::Le(e) => Atom::le(f(e)),
            Atom::Eq(e) => Atom::eq(f(e)),
            Atom::Div {
                modulus,
                expr,
                positive,
            } => Atom::divides(modulus.clone(), f(expr), *positive),
        }
    }

    pub fn substitute(&self, v: &VarId, e: &LinExpr) -> Lit {
        if !self.mentions(v) {
            return Lit::Atom(self.clone());
        }
        self.map_expr(|x| x.substitute(v, e))
    }

    pub fn rename(&self, f: &impl Fn(&VarId) -> VarId) -> Lit {
        match self {
            Atom::Bool { var, positive } => Lit::Atom(Atom::Bool {
                var: f(var),
                positive: *positive,
            }),
            _ => self.map_expr(|x| x.rename(f)),
        }
    }

    /// Evaluates under a total assignment; booleans are encoded as 0/1.
    /// `None` if some variable is unassigned or arithmetic overflows.
    pub fn eval(&self, value: &impl Fn(&VarId) -> Option<i64>) -> Option<bool> {
        match self {
            Atom::Bool { var, positive } => Some((value(var)? != 0) == *positive),
            Atom::Le(e) => Some(e.eval(value)? <= 0),
            Atom::Eq(e) => Some(e.eval(value)? == 0),
            Atom::Div {
                modulus,
                expr,
                positive,
            } => {
                let m = i128::try_from(modulus).ok()?;
                Some((expr.eval(value)?.rem_euclid(m) == 0) == *positive)
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Bool { var, positive } => {
                if *positive {
                    write!(f, "{var}")
                } else {
                    write!(f, "!{var}")
                }
            }
            Atom::Le(e) => write_relation(f, e, "<=", ">="),
            Atom::Eq(e) => write_relation(f, e, "=", "="),
            Atom::Div {
                modulus,
                expr,
                positive,
            } => {
                if !positive {
                    write!(f, "!")?;
                }
                write!(f, "divides({modulus}, {expr})")
            }
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Prints `e ⋈ 0` with positive terms on the left, e.g. `a_1 <= s`.
fn write_relation(f: &mut fmt::Formatter<'_>, e: &LinExpr, op: &str, flipped: &str) -> fmt::Result {
    let (pos, neg): (Vec<_>, Vec<_>) = e
        .terms()
        .iter()
        .cloned()
        .partition(|(_, c)| c.is_positive());
    let neg: Vec<(VarId, BigInt)> = neg.into_iter().map(|(v, c)| (v, -c)).collect();
    let k = -e.constant_part();
    if pos.is_empty() {
        // -N + c ⋈ 0  ⇔  N ⋈' c
        write_sum(f, &neg, &BigInt::zero())?;
        write!(f, " {flipped} ")?;
        write_sum(f, &[], &-k)
    } else {
        write_sum(f, &pos, &BigInt::zero())?;
        write!(f, " {op} ")?;
        write_sum(f, &neg, &k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> VarId {
        VarId::int("x")
    }

    #[test]
    fn strict_inequality_tightens() {
        // x < 1 becomes x <= 0
        let lits = Atom::compare(&LinExpr::var(x()), CmpOp::Lt, &LinExpr::constant(1));
        assert_eq!(lits, vec![Atom::le(LinExpr::var(x()))]);
        assert_eq!(lits[0], Lit::Atom(Atom::Le(LinExpr::var(x()))));
    }

    #[test]
    fn gcd_normalization_rounds_constant() {
        // 2x + 3 <= 0  ⇔  x <= -2 (integers)  ⇔  x + 2 <= 0
        let a = Atom::le(LinExpr::term(x(), 2).add_constant(&3.into()));
        assert_eq!(a, Lit::Atom(Atom::Le(LinExpr::var(x()).add_constant(&2.into()))));
        // 2x = 3 has no integer solution
        assert_eq!(Atom::eq(LinExpr::term(x(), 2).add_constant(&(-3).into())), Lit::False);
    }

    #[test]
    fn constant_atoms_fold() {
        assert_eq!(Atom::le(LinExpr::constant(0)), Lit::True);
        assert_eq!(Atom::le(LinExpr::constant(1)), Lit::False);
        assert_eq!(Atom::eq(LinExpr::constant(0)), Lit::True);
        assert_eq!(Atom::divides(3.into(), LinExpr::constant(6), true), Lit::True);
        assert_eq!(Atom::divides(3.into(), LinExpr::constant(7), false), Lit::True);
    }

    #[test]
    fn divisibility_reduces() {
        // 4 | 2x + 2  ⇔  2 | x + 1
        let l = Atom::divides(4.into(), LinExpr::term(x(), 2).add_constant(&2.into()), true);
        assert_eq!(
            l,
            Lit::Atom(Atom::Div {
                modulus: 2.into(),
                expr: LinExpr::var(x()).add_constant(&1.into()),
                positive: true
            })
        );
        // 4 | 2x + 1 never holds
        assert_eq!(
            Atom::divides(4.into(), LinExpr::term(x(), 2).add_constant(&1.into()), true),
            Lit::False
        );
    }

    #[test]
    fn negation_of_equality_is_two_sided() {
        let Lit::Atom(a) = Atom::eq(LinExpr::var(x()).add_constant(&(-1).into())) else {
            panic!()
        };
        let n = a.negate();
        assert_eq!(n.len(), 2);
        for v in -3..=3 {
            let val = |_: &VarId| Some(v);
            let orig = a.eval(&val).unwrap();
            let neg = n.iter().any(|b| b.eval(&val).unwrap());
            assert_ne!(orig, neg, "at x = {v}");
        }
    }

    #[test]
    fn display_moves_terms() {
        let s = VarId::int("s");
        let a1 = VarId::int("a_1");
        let Lit::Atom(a) = Atom::le(LinExpr::var(a1).sub(&LinExpr::var(s))) else {
            panic!()
        };
        assert_eq!(a.to_string(), "a_1 <= s");
        let Lit::Atom(b) = Atom::le(LinExpr::var(x()).neg().add_constant(&1.into())) else {
            panic!()
        };
        assert_eq!(b.to_string(), "x >= 1");
    }
}
