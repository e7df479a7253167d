//! Pairwise compatibility of predicates with respect to a property, decided
//! by verification on a small instance, and the cohesion-driven search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::abstraction::{abstract_property, abstract_system, PredicateSet};
use crate::checker::{check, CheckLimits, Verdict};
use crate::config::{Config, LevelBest, Objective};
use crate::formula::{Formula, VarId};
use crate::model::{CtlProperty, TransitionSystem};
use crate::Error;

/// Outcome of verifying one predicate subset on a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    /// Property atoms added so the property survives abstraction.
    pub added: Vec<Formula>,
    pub outcome: Result<Verdict, Error>,
}

impl Trial {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, Ok(Verdict::Holds))
    }

    pub fn describe(&self) -> String {
        match &self.outcome {
            Ok(v) => v.name().to_string(),
            Err(e) => format!("error: {e}"),
        }
    }
}

/// Distinct non-boolean property atoms mentioning a variable of `vars`.
pub fn property_atoms(prop: &CtlProperty, vars: &BTreeSet<VarId>) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for leaf in prop.leaves() {
        for a in leaf.atoms() {
            if a.is_bool() || !a.vars().iter().any(|v| vars.contains(v)) {
                continue;
            }
            let f = Formula::atom(a);
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
    out
}

/// The predicates at `positions` together with the property atoms over
/// the variables they share with the property.
pub fn augmented(ps: &PredicateSet, positions: &[usize], prop: &CtlProperty) -> (PredicateSet, Vec<Formula>) {
    let base = ps.subset(positions);
    let common: BTreeSet<VarId> = base.scope().intersection(&prop.vars()).cloned().collect();
    let added: Vec<Formula> = property_atoms(prop, &common)
        .into_iter()
        .filter(|f| base.iter().all(|p| &p.formula != f))
        .collect();
    let extra = PredicateSet::with_prefix(added.clone(), "bp");
    (base.union(&extra), added)
}

/// Abstracts `ts` and `prop` with the augmented subset and checks the result.
pub fn try_predicates(
    ts: &TransitionSystem,
    ps: &PredicateSet,
    positions: &[usize],
    prop: &CtlProperty,
    limits: CheckLimits,
) -> Trial {
    let (set, added) = augmented(ps, positions, prop);
    let outcome = abstract_system(ts, &set).and_then(|abs| {
        let ap = abstract_property(prop, &set, &ts.restriction)?;
        check(&abs, &ap, limits)
    });
    Trial { added, outcome }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairResult {
    pub compatible: bool,
    pub trial: Trial,
}

/// Symmetric 0/1 compatibility over all unordered pairs of candidates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompatibilityMatrix {
    pub size: usize,
    /// Keyed by `(i, j)` with `i < j`.
    pub pairs: BTreeMap<(usize, usize), PairResult>,
}

impl CompatibilityMatrix {
    /// A matrix with the given compatible pairs and nothing else recorded.
    pub fn from_compatible(size: usize, compatible: &[(usize, usize)]) -> CompatibilityMatrix {
        let mut pairs = BTreeMap::new();
        for i in 0..size {
            for j in i + 1..size {
                let c = compatible.contains(&(i, j)) || compatible.contains(&(j, i));
                let verdict = if c {
                    Verdict::Holds
                } else {
                    Verdict::NotShown {
                        witness: Formula::tt(),
                    }
                };
                pairs.insert(
                    (i, j),
                    PairResult {
                        compatible: c,
                        trial: Trial {
                            added: Vec::new(),
                            outcome: Ok(verdict),
                        },
                    },
                );
            }
        }
        CompatibilityMatrix { size, pairs }
    }

    pub fn compat(&self, i: usize, j: usize) -> u8 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pairs.get(&key).map_or(0, |p| p.compatible as u8)
    }

    pub fn cohesion(&self, preds: &[usize]) -> i64 {
        let mut total = 0;
        for (a, &x) in preds.iter().enumerate() {
            for &y in &preds[a + 1..] {
                total += self.compat(x, y) as i64;
            }
        }
        total
    }
}

/// Verifies every unordered pair on the small instance. Pairs whose
/// augmented predicate sets coincide are verified once.
pub fn compute_compatibility(
    small: &TransitionSystem,
    ps: &PredicateSet,
    prop: &CtlProperty,
    limits: CheckLimits,
    jobs: usize,
) -> Result<CompatibilityMatrix, Error> {
    let n = ps.len();
    let mut keys: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    let mut unique: BTreeMap<Vec<String>, (usize, usize)> = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let (set, _) = augmented(ps, &[i, j], prop);
            let mut key: Vec<String> = set.iter().map(|p| p.formula.to_string()).collect();
            key.sort();
            unique.entry(key.clone()).or_insert((i, j));
            keys.insert((i, j), key);
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let work: Vec<(Vec<String>, (usize, usize))> = unique.into_iter().collect();
    let trials: HashMap<Vec<String>, Trial> = pool.install(|| {
        work.into_par_iter()
            .map(|(key, (i, j))| (key, try_predicates(small, ps, &[i, j], prop, limits)))
            .collect()
    });
    let pairs = keys
        .into_iter()
        .map(|(pair, key)| {
            let trial = trials[&key].clone();
            (
                pair,
                PairResult {
                    compatible: trial.holds(),
                    trial,
                },
            )
        })
        .collect();
    Ok(CompatibilityMatrix { size: n, pairs })
}

/// An extension rejected because an incompatible pair would form an
/// abstraction disjoint from the rest of the configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    /// The rejected configuration, sorted.
    pub config: Vec<usize>,
    pub added: usize,
    pub incompatible_with: usize,
}

pub struct Exploration {
    pub best: LevelBest,
    pub skipped: Vec<Skipped>,
}

struct Explorer<'a> {
    ps: &'a PredicateSet,
    m: &'a CompatibilityMatrix,
    visited: HashSet<Vec<usize>>,
    best: LevelBest,
    skipped: Vec<Skipped>,
    k: usize,
}

impl Explorer<'_> {
    fn scope(&self, preds: impl IntoIterator<Item = usize>) -> BTreeSet<&VarId> {
        preds.into_iter().flat_map(|i| self.ps.get(i).scope.iter()).collect()
    }

    /// An incompatible member `j` whose pair with `i` is disjoint from the
    /// remaining members.
    fn disjoint_conflict(&self, cur: &[usize], i: usize) -> Option<usize> {
        cur.iter().copied().find(|&j| {
            self.m.compat(i, j) == 0 && {
                let rest = self.scope(cur.iter().copied().filter(|&x| x != j));
                let pair = self.scope([i, j]);
                rest.is_disjoint(&pair)
            }
        })
    }

    fn explore(&mut self, cur: &[usize], level: usize) {
        if level >= self.k {
            return;
        }
        for i in 0..self.ps.len() {
            if cur.contains(&i) {
                continue;
            }
            let mut next = cur.to_vec();
            next.push(i);
            next.sort_unstable();
            if !self.visited.insert(next.clone()) {
                continue;
            }
            if let Some(j) = self.disjoint_conflict(cur, i) {
                self.skipped.push(Skipped {
                    config: next,
                    added: i,
                    incompatible_with: j,
                });
                continue;
            }
            let cohesion = self.m.cohesion(&next);
            self.best.offer(level + 1, Config::new(self.ps, next.clone(), cohesion));
            self.explore(&next, level + 1);
        }
    }
}

pub fn explore_compat(ps: &PredicateSet, m: &CompatibilityMatrix, k: usize) -> Exploration {
    let mut ex = Explorer {
        ps,
        m,
        visited: HashSet::new(),
        best: LevelBest::new(Objective::MaxScore, k),
        skipped: Vec::new(),
        k,
    };
    ex.explore(&[], 0);
    Exploration {
        best: ex.best,
        skipped: ex.skipped,
    }
}

pub fn choose_preds_compat(ps: &PredicateSet, m: &CompatibilityMatrix, k: usize) -> Result<Config, Error> {
    assert!(k >= 1, "depth bound must be positive");
    explore_compat(ps, m, k).best.select().ok_or(Error::NoFeasibleConfig)
}
