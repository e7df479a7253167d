//! Predicate configurations and the per-level bookkeeping shared by both
//! selection heuristics.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::abstraction::PredicateSet;
use crate::formula::VarId;

/// A candidate predicate subset, given by positions in the candidate list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    /// Sorted positions.
    pub preds: Vec<usize>,
    pub num_vars: usize,
    /// Imprecision (lower is better) or cohesion (higher is better).
    pub score: i64,
}

impl Config {
    pub fn new(ps: &PredicateSet, mut preds: Vec<usize>, score: i64) -> Config {
        preds.sort_unstable();
        preds.dedup();
        let num_vars = num_vars(ps, &preds);
        Config {
            preds,
            num_vars,
            score,
        }
    }
}

pub fn num_vars(ps: &PredicateSet, preds: &[usize]) -> usize {
    preds
        .iter()
        .flat_map(|&i| ps.get(i).scope.iter())
        .collect::<BTreeSet<&VarId>>()
        .len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinScore,
    MaxScore,
}

impl Objective {
    fn score_key(self, s: i64) -> i64 {
        match self {
            Objective::MinScore => s,
            Objective::MaxScore => -s,
        }
    }

    /// Score first, then more variables; nothing else.
    fn level_order(self, a: &Config, b: &Config) -> Ordering {
        (self.score_key(a.score), Reverse(a.num_vars)).cmp(&(self.score_key(b.score), Reverse(b.num_vars)))
    }

    /// Score, more variables, fewer predicates, then smaller positions.
    pub fn total_order(self, a: &Config, b: &Config) -> Ordering {
        self.level_order(a, b)
            .then(a.preds.len().cmp(&b.preds.len()))
            .then_with(|| a.preds.cmp(&b.preds))
    }
}

/// The best configuration seen at each depth. A newcomer replaces the
/// incumbent only if it is strictly better on score, or equal on score with
/// more variables.
#[derive(Debug, Clone)]
pub struct LevelBest {
    objective: Objective,
    best: Vec<Option<Config>>,
}

impl LevelBest {
    pub fn new(objective: Objective, k: usize) -> LevelBest {
        LevelBest {
            objective,
            best: vec![None; k],
        }
    }

    /// `level` counts from 1.
    pub fn offer(&mut self, level: usize, c: Config) {
        let slot = &mut self.best[level - 1];
        let better = match slot {
            None => true,
            Some(old) => self.objective.level_order(&c, old) == Ordering::Less,
        };
        if better {
            *slot = Some(c);
        }
    }

    pub fn levels(&self) -> &[Option<Config>] {
        &self.best
    }

    /// The overall winner among the per-level entries.
    pub fn select(&self) -> Option<Config> {
        select_best(self.objective, self.best.iter().flatten())
    }
}

pub fn select_best<'a>(objective: Objective, configs: impl IntoIterator<Item = &'a Config>) -> Option<Config> {
    configs
        .into_iter()
        .min_by(|a, b| objective.total_order(a, b))
        .cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(preds: &[usize], num_vars: usize, score: i64) -> Config {
        Config {
            preds: preds.to_vec(),
            num_vars,
            score,
        }
    }

    #[test]
    fn level_keeps_first_on_full_tie() {
        let mut lb = LevelBest::new(Objective::MinScore, 2);
        lb.offer(1, c(&[3], 1, 0));
        lb.offer(1, c(&[0], 1, 0));
        assert_eq!(lb.levels()[0].as_ref().unwrap().preds, vec![3]);
        lb.offer(1, c(&[1], 2, 0));
        assert_eq!(lb.levels()[0].as_ref().unwrap().preds, vec![1]);
    }

    #[test]
    fn total_order() {
        let cs = [c(&[0, 1], 2, 1), c(&[2], 2, 1), c(&[3, 4], 3, 1), c(&[5], 1, 0)];
        assert_eq!(select_best(Objective::MaxScore, &cs).unwrap().preds, vec![3, 4]);
        assert_eq!(select_best(Objective::MinScore, &cs).unwrap().preds, vec![5]);
        let tied = [c(&[1, 2], 2, 1), c(&[0, 3], 2, 1)];
        assert_eq!(select_best(Objective::MaxScore, &tied).unwrap().preds, vec![0, 3]);
    }
}
