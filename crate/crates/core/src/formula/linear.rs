use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::VarId;

/// A linear integer term `Σ cᵢ·xᵢ + c`. Terms are kept sorted by variable
/// with no zero coefficients, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    terms: Vec<(VarId, BigInt)>,
    constant: BigInt,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c.into(),
        }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr {
            terms: vec![(v, BigInt::one())],
            constant: BigInt::zero(),
        }
    }

    pub fn term(v: VarId, c: impl Into<BigInt>) -> Self {
        LinExpr::from_terms(vec![(v, c.into())], BigInt::zero())
    }

    pub fn from_terms(mut terms: Vec<(VarId, BigInt)>, constant: BigInt) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(VarId, BigInt)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        LinExpr {
            terms: merged,
            constant,
        }
    }

    pub fn terms(&self) -> &[(VarId, BigInt)] {
        &self.terms
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, v: &VarId) -> Option<&BigInt> {
        self.terms
            .binary_search_by(|(w, _)| w.cmp(v))
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        self.coeff(v).is_some()
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.terms.iter().map(|(v, _)| v)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        LinExpr {
            terms: out,
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-BigInt::one())
    }

    pub fn scale(&self, k: &BigInt) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, k: &BigInt) -> LinExpr {
        LinExpr {
            terms: self.terms.clone(),
            constant: &self.constant + k,
        }
    }

    /// Removes `v` from the expression, returning its coefficient and the rest.
    pub fn split_off(&self, v: &VarId) -> (BigInt, LinExpr) {
        match self.terms.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => {
                let mut rest = self.clone();
                let (_, c) = rest.terms.remove(i);
                (c, rest)
            }
            Err(_) => (BigInt::zero(), self.clone()),
        }
    }

    /// Replaces `v` by `e`.
    pub fn substitute(&self, v: &VarId, e: &LinExpr) -> LinExpr {
        let (c, rest) = self.split_off(v);
        if c.is_zero() {
            return rest;
        }
        rest.add(&e.scale(&c))
    }

    /// Renames variables. The mapping must be injective on the variables of
    /// this expression; colliding targets are merged by addition.
    pub fn rename(&self, f: &impl Fn(&VarId) -> VarId) -> LinExpr {
        LinExpr::from_terms(
            self.terms.iter().map(|(v, c)| (f(v), c.clone())).collect(),
            self.constant.clone(),
        )
    }

    /// gcd of the variable coefficients (zero for constant expressions).
    pub fn coeff_gcd(&self) -> BigInt {
        self.terms
            .iter()
            .fold(BigInt::zero(), |g, (_, c)| g.gcd(c))
    }

    /// True when the first coefficient is negative; used to pick a canonical
    /// sign for equalities.
    pub fn leading_negative(&self) -> bool {
        self.terms.first().is_some_and(|(_, c)| c.is_negative())
    }

    /// Same variable part with a zero constant.
    pub fn homogeneous(&self) -> LinExpr {
        LinExpr {
            terms: self.terms.clone(),
            constant: BigInt::zero(),
        }
    }

    pub fn eval(&self, value: &impl Fn(&VarId) -> Option<i64>) -> Option<i128> {
        let mut acc = i128::try_from(&self.constant).ok()?;
        for (v, c) in &self.terms {
            let c = i128::try_from(c).ok()?;
            acc = acc.checked_add(c.checked_mul(value(v)? as i128)?)?;
        }
        Some(acc)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, &self.terms, &self.constant)
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Writes `c₁·x₁ + … + k` in model syntax, e.g. `2*x - y + 3`.
pub(crate) fn write_sum(
    f: &mut fmt::Formatter<'_>,
    terms: &[(VarId, BigInt)],
    constant: &BigInt,
) -> fmt::Result {
    let mut first = true;
    for (v, c) in terms {
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        if mag.is_one() {
            write!(f, "{v}")?;
        } else {
            write!(f, "{mag}*{v}")?;
        }
        first = false;
    }
    if first {
        write!(f, "{constant}")?;
    } else if constant.is_positive() {
        write!(f, " + {constant}")?;
    } else if constant.is_negative() {
        write!(f, " - {}", constant.abs())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_cancels_terms() {
        let x = VarId::int("x");
        let y = VarId::int("y");
        let a = LinExpr::from_terms(vec![(x.clone(), 2.into()), (y.clone(), 1.into())], 3.into());
        let b = LinExpr::from_terms(vec![(x.clone(), (-2).into())], (-3).into());
        let s = a.add(&b);
        assert_eq!(s, LinExpr::var(y));
        assert!(!s.mentions(&x));
    }

    #[test]
    fn substitute_replaces_variable() {
        let x = VarId::int("x");
        let y = VarId::int("y");
        let e = LinExpr::term(x.clone(), 3).add_constant(&1.into());
        let r = e.substitute(&x, &LinExpr::var(y.clone()).add_constant(&2.into()));
        assert_eq!(r.coeff(&y), Some(&BigInt::from(3)));
        assert_eq!(r.constant_part(), &BigInt::from(7));
    }

    #[test]
    fn display_is_readable() {
        let x = VarId::int("x");
        let y = VarId::int("y");
        let e = LinExpr::from_terms(vec![(x, 2.into()), (y, (-1).into())], (-4).into());
        assert_eq!(e.to_string(), "2*x - y - 4");
    }
}
