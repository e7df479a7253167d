//! Backward symbolic CTL evaluation with bounded fixpoint iteration.
//!
//! An ACTL property is negated into ECTL and its satisfying set is computed
//! inside the state-space restriction. The property holds when no initial
//! state lies in that set.

mod oracle;

use serde::{Deserialize, Serialize};

pub use oracle::{oracle_check, BoxPolicy, OracleBox};

use std::collections::BTreeSet;

use crate::formula::{qe, Atom, Cube, Formula, LinExpr, Lit, VarId, VarKind};
use crate::model::{CtlProperty, Fragment, TransitionSystem};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckLimits {
    pub max_iterations: usize,
    /// Iteration after which least fixpoints are widened; 0 disables.
    pub widen_after: usize,
}

pub const DEFAULT_MAX_ITERATIONS: usize = 64;
pub const DEFAULT_WIDEN_AFTER: usize = 4;

impl Default for CheckLimits {
    /// The iteration cap may be overridden with `PREDKIT_MAX_ITER`.
    fn default() -> Self {
        let max_iterations = std::env::var("PREDKIT_MAX_ITER")
            .ok()
            .and_then(|v| v.parse().ok())
            .filter(|&n: &usize| n >= 1)
            .unwrap_or(DEFAULT_MAX_ITERATIONS);
        CheckLimits {
            max_iterations,
            widen_after: DEFAULT_WIDEN_AFTER,
        }
    }
}

impl CheckLimits {
    pub fn exact(max_iterations: usize) -> Self {
        CheckLimits {
            max_iterations: max_iterations.max(1),
            widen_after: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// Initial states from which the property could not be shown.
    NotShown { witness: Formula },
    Nonconvergent { iterations: usize },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::NotShown { .. } => "not-shown",
            Verdict::Nonconvergent { .. } => "nonconvergent",
        }
    }
}

/// `pre[R](A) = ∃V'. (R ∧ A[V/V'])` for a single relation.
pub fn pre_image(r: &Formula, a: &Formula) -> Formula {
    let an = a.to_next();
    let mut out = Vec::new();
    for rc in r.cubes() {
        for ac in an.cubes() {
            let Some(c) = rc.and(ac) else { continue };
            if !qe::cube_sat(&c) {
                continue;
            }
            let nexts: Vec<VarId> = c.vars().into_iter().filter(VarId::is_next).collect();
            out.extend(qe::eliminate_cube(&c, &nexts).into_iter().filter(qe::cube_sat));
        }
    }
    Formula::from_cubes(out)
}

/// Pre-image under the union of all transitions, within the restriction.
pub fn pre_image_system(ts: &TransitionSystem, a: &Formula) -> Formula {
    Formula::or_all(ts.transitions.iter().map(|t| pre_image(&t.relation, a))).and(&ts.restriction)
}

enum Stop {
    Nonconvergent(usize),
    /// An initial state was found in an under-approximation of the set.
    Found(Formula),
    Error(Error),
}

struct Eval<'a> {
    ts: &'a TransitionSystem,
    limits: CheckLimits,
    init: Formula,
    /// A greatest fixpoint was cut off, so sets are over-approximations.
    approximate: bool,
}

impl Eval<'_> {
    fn sat(&mut self, p: &CtlProperty, top: bool) -> Result<Formula, Stop> {
        let s = &self.ts.restriction;
        Ok(match p {
            CtlProperty::Atom(f) => s.and(f),
            CtlProperty::And(a, b) => {
                let x = self.sat(a, false)?;
                if x.is_false() {
                    return Ok(x);
                }
                x.and(&self.sat(b, false)?)
            }
            CtlProperty::Or(a, b) => self.sat(a, top)?.or(&self.sat(b, top)?),
            CtlProperty::EX(a) => {
                let x = self.sat(a, false)?;
                pre_image_system(self.ts, &x)
            }
            CtlProperty::EF(a) => {
                let target = self.sat(a, false)?;
                self.least(target, None, top)?
            }
            CtlProperty::EU(a, b) => {
                let guard = self.sat(a, false)?;
                let target = self.sat(b, false)?;
                self.least(target, Some(guard), top)?
            }
            CtlProperty::EG(a) => {
                let x = self.sat(a, false)?;
                self.greatest(x)
            }
            CtlProperty::Not(_) => {
                return Err(Stop::Error(Error::Unsupported(
                    "negation above a temporal operator".into(),
                )))
            }
            other => {
                return Err(Stop::Error(Error::Unsupported(format!(
                    "universal operator in existential position: {other}"
                ))))
            }
        })
    }

    fn found(&self, z: &Formula) -> Option<Formula> {
        let w = self.init.and(z);
        w.satisfiable().then_some(w)
    }

    /// `μZ. target ∨ (guard ∧ pre(Z))`, iterated on the frontier only.
    fn least(&mut self, target: Formula, guard: Option<Formula>, top: bool) -> Result<Formula, Stop> {
        let mut z = target;
        if top {
            if let Some(w) = self.found(&z) {
                return Err(Stop::Found(w));
            }
        }
        let mut frontier = z.clone();
        for iter in 1..=self.limits.max_iterations {
            let mut step = pre_image_system(self.ts, &frontier);
            if let Some(g) = &guard {
                step = step.and(g);
            }
            let mut fresh: Vec<Cube> = step
                .cubes()
                .iter()
                .filter(|c| !Formula::cube((*c).clone()).entails(&z))
                .cloned()
                .collect();
            if fresh.is_empty() {
                return Ok(z);
            }
            if self.limits.widen_after > 0 && iter >= self.limits.widen_after {
                fresh = fresh.iter().map(|c| widen(c, &z)).collect();
            }
            frontier = Formula::from_cubes(fresh);
            z = z.or(&frontier);
            if top {
                if let Some(w) = self.found(&frontier) {
                    return Err(Stop::Found(w));
                }
            }
        }
        Err(Stop::Nonconvergent(self.limits.max_iterations))
    }

    /// `νZ. f ∧ pre(Z)`, iterated downward from `f`.
    fn greatest(&mut self, f: Formula) -> Formula {
        let mut z = f.clone();
        for _ in 0..self.limits.max_iterations {
            let next = f.and(&pre_image_system(self.ts, &z)).simplify();
            if z.entails(&next) {
                return next;
            }
            z = next;
        }
        self.approximate = true;
        z
    }
}

fn is_control(a: &Atom) -> bool {
    !a.is_linear() || a.vars().iter().all(|v| v.kind() == VarKind::Enum)
}

/// Data atoms split into bounds `e <= 0`; an equality yields two.
fn bounds(c: &Cube) -> Vec<Atom> {
    let mut out = Vec::new();
    for a in c.atoms().iter().filter(|a| !is_control(a)) {
        let lits = match a {
            Atom::Eq(e) => vec![Atom::le(e.clone()), Atom::le(e.neg())],
            _ => vec![Lit::Atom(a.clone())],
        };
        out.extend(lits.into_iter().filter_map(|l| match l {
            Lit::Atom(b) => Some(b),
            _ => None,
        }));
    }
    out
}

fn direction(a: &Atom) -> Option<LinExpr> {
    a.linear_expr().map(LinExpr::homogeneous)
}

/// Constraint-dropping widening. A new cube is compared with an existing
/// cube that has the same control literals (booleans, enumerations,
/// divisibility) and the same bound directions; bounds of the existing cube
/// that the new cube violates are dropped.
fn widen(c: &Cube, z: &Formula) -> Cube {
    let control: Vec<&Atom> = c.atoms().iter().filter(|a| is_control(a)).collect();
    let mine = bounds(c);
    let dirs: BTreeSet<LinExpr> = mine.iter().filter_map(direction).collect();
    let cf = Formula::cube(c.clone());
    for old in z.cubes() {
        if old.atoms().iter().filter(|a| is_control(a)).collect::<Vec<_>>() != control {
            continue;
        }
        let theirs = bounds(old);
        if theirs.iter().filter_map(direction).collect::<BTreeSet<_>>() != dirs {
            continue;
        }
        let kept = control
            .iter()
            .map(|a| (*a).clone())
            .chain(
                theirs
                    .into_iter()
                    .filter(|b| cf.entails(&Formula::atom(b.clone()))),
            );
        if let Some(w) = Cube::from_atoms(kept) {
            return w;
        }
    }
    c.clone()
}

/// Checks an ACTL property.
pub fn check(ts: &TransitionSystem, prop: &CtlProperty, limits: CheckLimits) -> Result<Verdict, Error> {
    match prop.fragment() {
        Fragment::State | Fragment::Actl => {}
        Fragment::Ectl | Fragment::Mixed => {
            return Err(Error::Unsupported(format!("property is not ACTL: {prop}")))
        }
    }
    let init = ts.init.and(&ts.restriction);
    let mut ev = Eval {
        ts,
        limits,
        init: init.clone(),
        approximate: false,
    };
    let bad = match ev.sat(&prop.negated(), true) {
        Ok(set) => set,
        Err(Stop::Found(w)) => return Ok(Verdict::NotShown { witness: w }),
        Err(Stop::Nonconvergent(n)) => return Ok(Verdict::Nonconvergent { iterations: n }),
        Err(Stop::Error(e)) => return Err(e),
    };
    let witness = init.and(&bad);
    if !witness.satisfiable() {
        Ok(Verdict::Holds)
    } else if ev.approximate {
        Ok(Verdict::Nonconvergent {
            iterations: limits.max_iterations,
        })
    } else {
        Ok(Verdict::NotShown {
            witness: witness.simplify(),
        })
    }
}

/// The set of states satisfying an ECTL formula, or `None` when a fixpoint
/// did not stabilize.
pub fn ectl_states(
    ts: &TransitionSystem,
    prop: &CtlProperty,
    limits: CheckLimits,
) -> Result<Option<Formula>, Error> {
    let mut ev = Eval {
        ts,
        limits,
        init: ts.init.and(&ts.restriction),
        approximate: false,
    };
    match ev.sat(&prop.nnf(), false) {
        Ok(f) if !ev.approximate => Ok(Some(f)),
        Ok(_) | Err(Stop::Nonconvergent(_)) => Ok(None),
        Err(Stop::Found(_)) => unreachable!("early exit only at top level"),
        Err(Stop::Error(e)) => Err(e),
    }
}
