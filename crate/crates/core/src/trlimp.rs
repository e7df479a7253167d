//! Transition-level imprecision scores and the configuration search that
//! uses them.
//!
//! For an ordered pair of transitions `(first, then)` the conjunction
//! `first ∧ Range(pre[then](true))` describes the steps of `first` after
//! which `then` is enabled. Each score counts the predicate sign regions
//! such a conjunction covers after abstraction but not before.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abstraction::{alpha_trans, gamma, PredicateSet};
use crate::checker::pre_image;
use crate::config::{Config, LevelBest, Objective};
use crate::formula::{Formula, VarId};
use crate::model::TransitionSystem;
use crate::Error;

/// One nonzero score increment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    /// The transition executed first.
    pub first: String,
    /// The transition it enables.
    pub then: String,
    /// One position for an individual score, two for a pairwise score.
    pub preds: Vec<usize>,
    pub increment: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ImprecisionScores {
    /// Indexed by predicate position.
    pub individual: Vec<u64>,
    /// Keyed by `(i, j)` with `i < j`.
    pub pairwise: BTreeMap<(usize, usize), u64>,
    pub contributions: Vec<Contribution>,
}

impl ImprecisionScores {
    pub fn is(&self, i: usize) -> u64 {
        self.individual[i]
    }

    pub fn pws(&self, i: usize, j: usize) -> u64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pairwise.get(&key).copied().unwrap_or(0)
    }

    /// Sum of the increments recorded for one ordered transition pair.
    pub fn contribution(&self, first: &str, then: &str, preds: &[usize]) -> u64 {
        self.contributions
            .iter()
            .filter(|c| c.first == first && c.then == then && c.preds == preds)
            .map(|c| c.increment)
            .sum()
    }
}

/// The sign regions of a predicate subset, as conjunctions of literals.
fn basis(lits: Vec<(Formula, Formula)>) -> Vec<Formula> {
    let mut out = vec![Formula::tt()];
    for (pos, neg) in &lits {
        out = out.iter().flat_map(|b| [b.and(pos), b.and(neg)]).collect();
    }
    out
}

/// `r_first ∧ Range(pre[r_then](true))` for every ordered pair.
fn trigger_matrix(relations: &[Formula]) -> Vec<Vec<Formula>> {
    let enabled: Vec<Formula> = relations
        .iter()
        .map(|r| pre_image(r, &Formula::tt()).to_next())
        .collect();
    relations
        .iter()
        .map(|r| enabled.iter().map(|e| r.and(e)).collect())
        .collect()
}

fn coverage(conj: &Formula, basis: &[Formula]) -> usize {
    if conj.is_false() {
        return 0;
    }
    basis.iter().filter(|b| conj.and(b).satisfiable()).count()
}

/// Scores every predicate and every unordered predicate pair over all
/// ordered transition pairs, including a transition paired with itself.
pub fn comp_trans_level_imp(ts: &TransitionSystem, ps: &PredicateSet) -> ImprecisionScores {
    let n = ps.len();
    let mut subsets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for i in 0..n {
        for j in i + 1..n {
            subsets.push(vec![i, j]);
        }
    }
    let relations: Vec<Formula> = ts.transitions.iter().map(|t| t.relation.clone()).collect();
    let concrete = trigger_matrix(&relations);
    let labels: Vec<&str> = ts.labels();
    let results: Vec<Vec<Contribution>> = subsets
        .into_par_iter()
        .map(|preds| {
            let sub = ps.subset(&preds);
            let conc_basis = basis(sub.iter().map(|p| (p.formula.clone(), p.formula.not())).collect());
            let abs_basis = basis(
                sub.bool_vars()
                    .into_iter()
                    .map(|b| (Formula::boolean(b.clone(), true), Formula::boolean(b, false)))
                    .collect(),
            );
            let mut abs: Option<Vec<Vec<Formula>>> = None;
            let mut out = Vec::new();
            for (k, first) in labels.iter().enumerate() {
                for (j, then) in labels.iter().enumerate() {
                    let cc = coverage(&concrete[k][j], &conc_basis);
                    if cc >= conc_basis.len() {
                        continue;
                    }
                    let abs = abs.get_or_insert_with(|| {
                        trigger_matrix(&relations.iter().map(|r| alpha_trans(r, &sub)).collect::<Vec<_>>())
                    });
                    let ac = coverage(&abs[k][j], &abs_basis);
                    debug_assert!(ac >= cc, "abstraction lost coverage");
                    let inc = ac.saturating_sub(cc) as u64;
                    if inc > 0 {
                        out.push(Contribution {
                            first: first.to_string(),
                            then: then.to_string(),
                            preds: preds.clone(),
                            increment: inc,
                        });
                    }
                }
            }
            out
        })
        .collect();
    let mut scores = ImprecisionScores {
        individual: vec![0; n],
        ..Default::default()
    };
    for i in 0..n {
        for j in i + 1..n {
            scores.pairwise.insert((i, j), 0);
        }
    }
    for c in results.into_iter().flatten() {
        match c.preds[..] {
            [i] => scores.individual[i] += c.increment,
            [i, j] => *scores.pairwise.get_mut(&(i, j)).unwrap() += c.increment,
            _ => unreachable!(),
        }
        scores.contributions.push(c);
    }
    scores
}

/// Whether abstraction with `ps` strictly weakens, for `r1` followed by
/// `r2` or for `r2` followed by `r1`, the steps after which the second
/// transition is enabled.
pub fn strictly_imprecise(r1: &Formula, r2: &Formula, ps: &PredicateSet) -> bool {
    let one_way = |a: &Formula, b: &Formula| {
        let conc = a.and(&pre_image(b, &Formula::tt()).to_next());
        let aa = alpha_trans(a, ps);
        let ab = alpha_trans(b, ps);
        let abs = gamma(&aa.and(&pre_image(&ab, &Formula::tt()).to_next()), ps);
        debug_assert!(conc.entails(&abs), "abstraction is not an over-approximation");
        !abs.entails(&conc)
    };
    one_way(r2, r1) || one_way(r1, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrlimpOptions {
    /// Keep out predicates sharing a variable with an individually imprecise
    /// predicate.
    pub scope_exclusion: bool,
}

impl Default for TrlimpOptions {
    fn default() -> Self {
        TrlimpOptions {
            scope_exclusion: true,
        }
    }
}

struct Explorer<'a> {
    ps: &'a PredicateSet,
    scores: &'a ImprecisionScores,
    excluded: BTreeSet<VarId>,
    visited: HashSet<Vec<usize>>,
    best: LevelBest,
    k: usize,
}

impl Explorer<'_> {
    fn admissible(&self, i: usize) -> bool {
        self.scores.is(i) == 0 && self.ps.get(i).scope.is_disjoint(&self.excluded)
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
            if self.visited.contains(&next) || !self.admissible(i) {
                continue;
            }
            self.visited.insert(next.clone());
            let score: u64 = next
                .iter()
                .enumerate()
                .flat_map(|(a, &x)| next[a + 1..].iter().map(move |&y| (x, y)))
                .map(|(x, y)| self.scores.pws(x, y))
                .sum();
            self.best.offer(level + 1, Config::new(self.ps, next.clone(), score as i64));
            self.explore(&next, level + 1);
        }
    }
}

/// Per-level best configurations of up to `k` predicates.
pub fn explore_trlimp(
    ps: &PredicateSet,
    scores: &ImprecisionScores,
    k: usize,
    opts: TrlimpOptions,
) -> LevelBest {
    let excluded = if opts.scope_exclusion {
        (0..ps.len())
            .filter(|&i| scores.is(i) > 0)
            .flat_map(|i| ps.get(i).scope.iter().cloned())
            .collect()
    } else {
        BTreeSet::new()
    };
    let mut ex = Explorer {
        ps,
        scores,
        excluded,
        visited: HashSet::new(),
        best: LevelBest::new(Objective::MinScore, k),
        k,
    };
    ex.explore(&[], 0);
    ex.best
}

pub fn choose_preds_trlimp(
    ps: &PredicateSet,
    scores: &ImprecisionScores,
    k: usize,
    opts: TrlimpOptions,
) -> Result<Config, Error> {
    assert!(k >= 1, "depth bound must be positive");
    explore_trlimp(ps, scores, k, opts)
        .select()
        .ok_or(Error::NoFeasibleConfig)
}
