//! Explicit-state reference checker for systems whose reachable states fit
//! in a finite box.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::Verdict;
use crate::formula::{Atom, CmpOp, Cube, Formula, LinExpr, VarId, VarKind};
use crate::model::{CtlProperty, TransitionSystem};
use crate::Error;

const MAX_STATES: usize = 1_000_000;
const MAX_WITNESS_STATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxPolicy {
    /// A reachable state outside the box is an error.
    Error,
    /// States outside the box are silently dropped.
    Truncate,
}

/// Inclusive bounds for every integer variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBox {
    pub bounds: BTreeMap<String, (i64, i64)>,
    pub policy: BoxPolicy,
}

impl OracleBox {
    /// The same bounds for every integer variable of `ts`.
    pub fn uniform(ts: &TransitionSystem, lo: i64, hi: i64, policy: BoxPolicy) -> OracleBox {
        let bounds = ts
            .vars
            .iter()
            .filter(|v| v.kind() == VarKind::Int)
            .map(|v| (v.name().to_string(), (lo, hi)))
            .collect();
        OracleBox { bounds, policy }
    }
}

struct Space<'a> {
    ts: &'a TransitionSystem,
    index: HashMap<VarId, usize>,
    ranges: Vec<(i64, i64)>,
}

impl<'a> Space<'a> {
    fn new(ts: &'a TransitionSystem, bx: &OracleBox) -> Result<Self, Error> {
        let mut index = HashMap::new();
        let mut ranges = Vec::new();
        for (i, v) in ts.vars.iter().enumerate() {
            index.insert(v.clone(), i);
            let r = match (bx.bounds.get(v.name()), v.kind()) {
                (Some(&r), _) => r,
                (None, VarKind::Bool) => (0, 1),
                (None, VarKind::Enum) => (0, ts.enums.get(v.name()).map_or(0, |l| l.len() as i64 - 1)),
                (None, VarKind::Int) => {
                    return Err(Error::Unsupported(format!("no box bounds for `{}`", v.name())))
                }
            };
            ranges.push(r);
        }
        Ok(Space { ts, index, ranges })
    }

    fn n(&self) -> usize {
        self.ranges.len()
    }

    fn slot(&self, v: &VarId) -> usize {
        let i = self.index[&v.unprimed()];
        if v.is_next() {
            i + self.n()
        } else {
            i
        }
    }

    /// Enumerates assignments to the slots in `unknown` satisfying every atom
    /// of `cube`. Values forced by equalities may leave the box; such
    /// solutions are reported with `escaped = true`.
    fn solve(
        &self,
        cube: &Cube,
        vals: &mut Vec<Option<i64>>,
        unknown: &[usize],
        out: &mut dyn FnMut(&[Option<i64>], bool),
    ) {
        self.solve_rec(cube.atoms(), vals, unknown.to_vec(), false, out);
    }

    fn lookup<'v>(&'v self, vals: &'v [Option<i64>]) -> impl Fn(&VarId) -> Option<i64> + 'v {
        move |v: &VarId| vals[self.slot(v)]
    }

    fn solve_rec(
        &self,
        atoms: &[Atom],
        vals: &mut Vec<Option<i64>>,
        mut unknown: Vec<usize>,
        escaped: bool,
        out: &mut dyn FnMut(&[Option<i64>], bool),
    ) {
        {
            let value = self.lookup(vals);
            if atoms.iter().any(|a| a.eval(&value) == Some(false)) {
                return;
            }
        }
        let Some(pos) = unknown.iter().position(|&s| self.forced(atoms, vals, s).is_some()) else {
            let Some(slot) = unknown.pop() else {
                out(vals, escaped);
                return;
            };
            let (lo, hi) = self.ranges[slot % self.n()];
            for x in lo..=hi {
                vals[slot] = Some(x);
                self.solve_rec(atoms, vals, unknown.clone(), escaped, out);
            }
            vals[slot] = None;
            return;
        };
        let slot = unknown.swap_remove(pos);
        if let Some(x) = self.forced(atoms, vals, slot).unwrap() {
            let (lo, hi) = self.ranges[slot % self.n()];
            vals[slot] = Some(x);
            self.solve_rec(atoms, vals, unknown, escaped || x < lo || x > hi, out);
            vals[slot] = None;
        }
    }

    /// `Some(Some(x))` if an atom forces the slot to `x`, `Some(None)` if an
    /// atom makes every value impossible, `None` if nothing forces it.
    fn forced(&self, atoms: &[Atom], vals: &[Option<i64>], slot: usize) -> Option<Option<i64>> {
        for a in atoms {
            match a {
                Atom::Bool { var, positive } if self.slot(var) == slot => {
                    return Some(Some(*positive as i64));
                }
                Atom::Eq(e) => {
                    let mut coeff = None;
                    let mut ready = true;
                    for (v, c) in e.terms() {
                        let s = self.slot(v);
                        if s == slot {
                            coeff = Some(c);
                        } else if vals[s].is_none() {
                            ready = false;
                        }
                    }
                    let (Some(c), true) = (coeff, ready) else { continue };
                    let c = i128::try_from(c).ok()?;
                    let rest = e.eval(&|v: &VarId| {
                        let s = self.slot(v);
                        if s == slot {
                            Some(0)
                        } else {
                            vals[s]
                        }
                    })?;
                    if rest % c != 0 {
                        return Some(None);
                    }
                    return Some(i64::try_from(-rest / c).ok());
                }
                _ => {}
            }
        }
        None
    }

    fn holds(&self, f: &Formula, state: &[i64]) -> bool {
        let value = |v: &VarId| Some(state[self.index[v]]);
        f.eval(&value) == Some(true)
    }

    fn describe(&self, state: &[Option<i64>], from: usize) -> String {
        self.ts
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| match state[from + i] {
                Some(x) => format!("{}={x}", v.name()),
                None => format!("{}=?", v.name()),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn state_formula(&self, state: &[i64]) -> Formula {
        Formula::and_all(self.ts.vars.iter().zip(state).map(|(v, &x)| {
            if v.is_bool() {
                Formula::boolean(v.clone(), x != 0)
            } else {
                Formula::cmp(&LinExpr::var(v.clone()), CmpOp::Eq, &LinExpr::constant(x))
            }
        }))
    }
}

struct Graph {
    states: Vec<Vec<i64>>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    initial: Vec<usize>,
}

fn explore(sp: &Space, policy: BoxPolicy) -> Result<Graph, Error> {
    let n = sp.n();
    let ts = sp.ts;
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut g = Graph {
        states: Vec::new(),
        succ: Vec::new(),
        pred: Vec::new(),
        initial: Vec::new(),
    };
    let mut queue = VecDeque::new();
    let mut violation: Option<String> = None;

    let mut add = |st: Vec<i64>, g: &mut Graph, queue: &mut VecDeque<usize>| -> Result<usize, Error> {
        if let Some(&i) = ids.get(&st) {
            return Ok(i);
        }
        if g.states.len() >= MAX_STATES {
            return Err(Error::StateExplosion(MAX_STATES));
        }
        let i = g.states.len();
        ids.insert(st.clone(), i);
        g.states.push(st);
        g.succ.push(Vec::new());
        g.pred.push(Vec::new());
        queue.push_back(i);
        Ok(i)
    };

    let start = ts.init.and(&ts.restriction);
    let mut found = Vec::new();
    for c in start.cubes() {
        let mut vals = vec![None; n];
        let unknown: Vec<usize> = (0..n).collect();
        sp.solve(c, &mut vals, &unknown, &mut |v, escaped| {
            let st: Vec<i64> = v.iter().map(|x| x.unwrap()).collect();
            if escaped {
                if sp.holds(&ts.restriction, &st) && violation.is_none() {
                    violation = Some(format!("initial state {}", sp.describe(v, 0)));
                }
            } else {
                found.push(st);
            }
        });
    }
    if policy == BoxPolicy::Error {
        if let Some(v) = violation.take() {
            return Err(Error::ClosureViolation(v));
        }
    }
    for st in found {
        let i = add(st, &mut g, &mut queue)?;
        if !g.initial.contains(&i) {
            g.initial.push(i);
        }
    }

    let next_slots: Vec<usize> = (n..2 * n).collect();
    while let Some(i) = queue.pop_front() {
        let mut nexts = Vec::new();
        for t in &ts.transitions {
            for c in t.relation.cubes() {
                let mut vals: Vec<Option<i64>> = g.states[i].iter().map(|&x| Some(x)).collect();
                vals.resize(2 * n, None);
                sp.solve(c, &mut vals, &next_slots, &mut |v, escaped| {
                    let st: Vec<i64> = v[n..].iter().map(|x| x.unwrap()).collect();
                    if !sp.holds(&ts.restriction, &st) {
                        return;
                    }
                    if escaped {
                        if violation.is_none() {
                            violation = Some(format!(
                                "{} -> {} via {}",
                                sp.describe(v, 0),
                                sp.describe(v, n),
                                t.label
                            ));
                        }
                    } else {
                        nexts.push(st);
                    }
                });
            }
        }
        if policy == BoxPolicy::Error {
            if let Some(v) = violation.take() {
                return Err(Error::ClosureViolation(v));
            }
        }
        for st in nexts {
            let j = add(st, &mut g, &mut queue)?;
            if !g.succ[i].contains(&j) {
                g.succ[i].push(j);
                g.pred[j].push(i);
            }
        }
    }
    Ok(g)
}

type Set = Vec<bool>;

fn label(sp: &Space, g: &Graph, p: &CtlProperty) -> Set {
    use CtlProperty as P;
    let all = g.states.len();
    let not = |s: Set| -> Set { s.into_iter().map(|b| !b).collect() };
    match p {
        P::Atom(f) => g.states.iter().map(|s| sp.holds(f, s)).collect(),
        P::Not(a) => not(label(sp, g, a)),
        P::And(a, b) => {
            let (x, y) = (label(sp, g, a), label(sp, g, b));
            x.iter().zip(&y).map(|(a, b)| *a && *b).collect()
        }
        P::Or(a, b) => {
            let (x, y) = (label(sp, g, a), label(sp, g, b));
            x.iter().zip(&y).map(|(a, b)| *a || *b).collect()
        }
        P::EX(a) => {
            let x = label(sp, g, a);
            (0..all).map(|i| g.succ[i].iter().any(|&j| x[j])).collect()
        }
        P::EU(a, b) => eu(g, &label(sp, g, a), label(sp, g, b)),
        P::EF(a) => eu(g, &vec![true; all], label(sp, g, a)),
        P::EG(a) => eg(g, label(sp, g, a)),
        P::AX(a) => not(label(sp, g, &P::EX(Box::new(P::Not(a.clone()))))),
        P::AG(a) => not(eu(g, &vec![true; all], not(label(sp, g, a)))),
        P::AF(a) => not(eg(g, not(label(sp, g, a)))),
        P::AU(a, b) => {
            let na = not(label(sp, g, a));
            let nb = not(label(sp, g, b));
            let both: Set = na.iter().zip(&nb).map(|(x, y)| *x && *y).collect();
            let u = eu(g, &nb, both);
            let v = eg(g, nb);
            u.iter().zip(&v).map(|(x, y)| !(*x || *y)).collect()
        }
    }
}

fn eu(g: &Graph, guard: &Set, target: Set) -> Set {
    let mut z = target;
    let mut work: Vec<usize> = (0..z.len()).filter(|&i| z[i]).collect();
    while let Some(j) = work.pop() {
        for &i in &g.pred[j] {
            if !z[i] && guard[i] {
                z[i] = true;
                work.push(i);
            }
        }
    }
    z
}

/// States with an infinite path staying in `f`.
fn eg(g: &Graph, f: Set) -> Set {
    let mut z = f;
    let mut live: Vec<usize> = (0..z.len())
        .map(|i| g.succ[i].iter().filter(|&&j| z[j]).count())
        .collect();
    let mut work: Vec<usize> = (0..z.len()).filter(|&i| z[i] && live[i] == 0).collect();
    for &i in &work {
        z[i] = false;
    }
    while let Some(j) = work.pop() {
        for &i in &g.pred[j] {
            if z[i] {
                live[i] -= 1;
                if live[i] == 0 {
                    z[i] = false;
                    work.push(i);
                }
            }
        }
    }
    z
}

/// Decides a CTL property by explicit exploration of the states reachable
/// from the initial states inside the box.
pub fn oracle_check(ts: &TransitionSystem, prop: &CtlProperty, bx: &OracleBox) -> Result<Verdict, Error> {
    let sp = Space::new(ts, bx)?;
    let g = explore(&sp, bx.policy)?;
    let sat = label(&sp, &g, prop);
    let bad: Vec<usize> = g.initial.iter().copied().filter(|&i| !sat[i]).collect();
    if bad.is_empty() {
        return Ok(Verdict::Holds);
    }
    let witness = Formula::or_all(
        bad.iter()
            .take(MAX_WITNESS_STATES)
            .map(|&i| sp.state_formula(&g.states[i])),
    );
    Ok(Verdict::NotShown { witness })
}
