//! The JSON run report and its text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use predkit_core::checker::Verdict;
use predkit_core::compat::CompatibilityMatrix;
use predkit_core::trlimp::ImprecisionScores;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub model: String,
    pub model_sha256: String,
    pub seed: Option<u64>,
    pub predicates: Vec<String>,
    pub verdicts: BTreeMap<String, VerdictReport>,
    pub config: Option<ConfigReport>,
    pub scores: Option<ScoresReport>,
    pub compat: Option<CompatReport>,
    /// Wall-clock seconds per phase; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: String,
    pub witness: Option<String>,
    pub iterations: Option<usize>,
}

impl From<&Verdict> for VerdictReport {
    fn from(v: &Verdict) -> Self {
        VerdictReport {
            verdict: v.name().to_string(),
            witness: match v {
                Verdict::NotShown { witness } => Some(witness.to_string()),
                _ => None,
            },
            iterations: match v {
                Verdict::Nonconvergent { iterations } => Some(*iterations),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub preds: Vec<usize>,
    pub formulas: Vec<String>,
    pub num_vars: usize,
    pub score: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub first: String,
    pub then: String,
    pub preds: Vec<usize>,
    pub increment: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoresReport {
    pub individual: Vec<u64>,
    /// Full symmetric matrix with a zero diagonal.
    pub pairwise: Vec<Vec<u64>>,
    pub contributions: Vec<ContributionReport>,
}

impl ScoresReport {
    pub fn new(s: &ImprecisionScores) -> ScoresReport {
        let n = s.individual.len();
        ScoresReport {
            individual: s.individual.clone(),
            pairwise: (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0 } else { s.pws(i, j) }).collect())
                .collect(),
            contributions: s
                .contributions
                .iter()
                .map(|c| ContributionReport {
                    first: c.first.clone(),
                    then: c.then.clone(),
                    preds: c.preds.clone(),
                    increment: c.increment,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub compatible: bool,
    pub verdict: String,
    pub added: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatReport {
    /// Full symmetric 0/1 matrix with a zero diagonal.
    pub matrix: Vec<Vec<u8>>,
    pub pairs: Vec<PairReport>,
}

impl CompatReport {
    pub fn new(m: &CompatibilityMatrix) -> CompatReport {
        CompatReport {
            matrix: (0..m.size)
                .map(|i| (0..m.size).map(|j| if i == j { 0 } else { m.compat(i, j) }).collect())
                .collect(),
            pairs: m
                .pairs
                .iter()
                .map(|(&(i, j), r)| PairReport {
                    i,
                    j,
                    compatible: r.compatible,
                    verdict: r.trial.describe(),
                    added: r.trial.added.iter().map(|f| f.to_string()).collect(),
                })
                .collect(),
        }
    }
}

fn grid(out: &mut String, n: usize, cell: impl Fn(usize, usize) -> String, extra: Option<(&str, Vec<String>)>) {
    let _ = write!(out, "{:>4}", "");
    for j in 0..n {
        let _ = write!(out, "{j:>4}");
    }
    if let Some((h, _)) = &extra {
        let _ = write!(out, "  {h:>5}");
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(out, "{i:>4}");
        for j in 0..n {
            let _ = write!(out, "{:>4}", if i == j { "-".to_string() } else { cell(i, j) });
        }
        if let Some((_, col)) = &extra {
            let _ = write!(out, "  {:>5}", col[i]);
        }
        out.push('\n');
    }
}

/// Aligned text: the predicate legend, then the compatibility grid (✓ for
/// compatible pairs, with each row's count) and/or the imprecision grid,
/// then the chosen configuration and any verdicts.
pub fn render(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} (sha256 {})", r.model, &r.model_sha256[..r.model_sha256.len().min(12)]);
    let _ = writeln!(out, "predicates:");
    for (i, p) in r.predicates.iter().enumerate() {
        let _ = writeln!(out, "{i:>4}  {p}");
    }
    let n = r.predicates.len();
    if let Some(c) = &r.compat {
        let _ = writeln!(out, "compatibility:");
        let counts = c.matrix.iter().map(|row| row.iter().map(|&x| x as u64).sum::<u64>().to_string()).collect();
        grid(
            &mut out,
            n,
            |i, j| if c.matrix[i][j] == 1 { "✓".into() } else { ".".into() },
            Some(("#", counts)),
        );
    }
    if let Some(s) = &r.scores {
        let _ = writeln!(out, "imprecision (pairwise grid, individual column):");
        let is = s.individual.iter().map(u64::to_string).collect();
        grid(&mut out, n, |i, j| s.pairwise[i][j].to_string(), Some(("IS", is)));
    }
    match &r.config {
        Some(c) => {
            let _ = writeln!(
                out,
                "chosen: {{{}}} (score {}, variables {})",
                c.formulas.join(", "),
                c.score,
                c.num_vars
            );
        }
        None if r.compat.is_some() || r.scores.is_some() => {
            let _ = writeln!(out, "chosen: none (no feasible configuration)");
        }
        None => {}
    }
    for (k, v) in &r.verdicts {
        let _ = write!(out, "{k}: {}", v.verdict);
        if let Some(w) = &v.witness {
            let _ = write!(out, " ({w})");
        }
        if let Some(i) = v.iterations {
            let _ = write!(out, " after {i} iterations");
        }
        out.push('\n');
    }
    out
}
