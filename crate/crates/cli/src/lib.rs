//! The `predkit` command line.
//!
//! Exit codes: 0 holds (or success), 1 not shown, 2 nonconvergent,
//! 64 usage error, 65 unreadable or invalid input.

mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use predkit_core::abstraction::{abstract_property, abstract_system, PredicateSet};
use predkit_core::checker::{check, CheckLimits, Verdict};
use predkit_core::compat::{augmented, choose_preds_compat, compute_compatibility};
use predkit_core::config::Config;
use predkit_core::model::{extract_candidate_predicates, CtlProperty, ModelTemplate, TransitionSystem};
use predkit_core::trlimp::{choose_preds_trlimp, comp_trans_level_imp, TrlimpOptions};
use predkit_core::Error;

pub use report::{render, CompatReport, ConfigReport, PairReport, RunReport, ScoresReport, VerdictReport};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_NOT_SHOWN: i32 = 1;
pub const EXIT_NONCONVERGENT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "predkit", version, about = "Partial predicate abstraction and predicate selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args, Debug)]
struct LimitArgs {
    /// Fixpoint iteration cap (default 64, or PREDKIT_MAX_ITER).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Widen least fixpoints from this iteration on; 0 disables.
    #[arg(long)]
    widen_after: Option<usize>,
}

impl LimitArgs {
    fn limits(&self) -> Result<CheckLimits, CliError> {
        let mut l = CheckLimits::default();
        if let Some(m) = self.max_iter {
            if m == 0 {
                return Err(CliError::Usage("--max-iter must be at least 1".into()));
            }
            l.max_iterations = m;
        }
        if let Some(w) = self.widen_after {
            l.widen_after = w;
        }
        Ok(l)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the JSON run report here.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Reserved; every algorithm is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Heuristic {
    Trlimp,
    Compat,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an ACTL property, optionally after abstraction.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        prop: String,
        /// Predicate file, one formula per line.
        #[arg(long)]
        preds: Option<String>,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print the partially abstracted system in model syntax.
    Abstract {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: Option<usize>,
        /// `auto` or a predicate file.
        #[arg(long)]
        preds: String,
        #[arg(long)]
        prop: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Transition-level imprecision scores and the chosen configuration.
    Trlimp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "auto")]
        preds: String,
        /// Property whose atoms join the automatic candidates.
        #[arg(long)]
        prop: Option<String>,
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        /// Do not exclude predicates sharing variables with imprecise ones.
        #[arg(long)]
        no_scope_exclusion: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Pairwise compatibility on a small instance and the chosen configuration.
    Compat {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        small_n: usize,
        #[arg(long, default_value = "auto")]
        preds: String,
        #[arg(long)]
        prop: String,
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Select predicates, then abstract and check the large instance.
    Choose {
        #[arg(long, value_enum)]
        heuristic: Heuristic,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        small_n: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        prop: String,
        #[arg(long, default_value = "auto")]
        preds: String,
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        no_scope_exclusion: bool,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Render a JSON run report as text.
    Report { file: PathBuf },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    NoFeasibleConfig,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoFeasibleConfig => CliError::NoFeasibleConfig,
            e => CliError::Input(e.to_string()),
        }
    }
}

/// Runs the command line; `argv[0]` is the program name.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli.command, &argv) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            EXIT_INPUT
        }
        Err(CliError::NoFeasibleConfig) => {
            eprintln!("error: no feasible configuration");
            EXIT_NOT_SHOWN
        }
    }
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        *self.0.entry(phase.to_string()).or_default() += t0.elapsed().as_secs_f64();
        out
    }
}

struct Loaded {
    template: ModelTemplate,
    sha256: String,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))?;
    let template =
        ModelTemplate::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        template,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn instance(m: &Loaded, n: Option<usize>) -> Result<TransitionSystem, CliError> {
    let n = n.unwrap_or(m.template.default_n);
    if n == 0 {
        return Err(CliError::Usage("instance size must be at least 1".into()));
    }
    Ok(m.template.instantiate(n)?)
}

fn property(ts: &TransitionSystem, text: &str) -> Result<CtlProperty, CliError> {
    ts.parse_property(text)
        .map_err(|e| CliError::Input(format!("property: {e}")))
}

/// `auto` extracts candidates from the system and property; anything else
/// names a file with one formula per line (`//` starts a comment).
fn predicates(ts: &TransitionSystem, source: &str, prop: &CtlProperty) -> Result<PredicateSet, CliError> {
    if source == "auto" {
        return Ok(extract_candidate_predicates(ts, prop));
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    let mut fs_ = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f = ts
            .parse_formula(line)
            .map_err(|e| CliError::Input(format!("{source}:{}: {e}", no + 1)))?;
        fs_.push(f);
    }
    Ok(PredicateSet::new(fs_))
}

fn check_k(k: usize) -> Result<(), CliError> {
    if k == 0 {
        Err(CliError::Usage("-k must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Holds => EXIT_HOLDS,
        Verdict::NotShown { .. } => EXIT_NOT_SHOWN,
        Verdict::Nonconvergent { .. } => EXIT_NONCONVERGENT,
    }
}

fn describe_verdict(v: &Verdict) -> String {
    match v {
        Verdict::Holds => "holds".into(),
        Verdict::NotShown { witness } => format!("not shown; violating initial states: {witness}"),
        Verdict::Nonconvergent { iterations } => format!("nonconvergent after {iterations} iterations"),
    }
}

fn config_report(ps: &PredicateSet, c: &Config) -> ConfigReport {
    ConfigReport {
        preds: c.preds.clone(),
        formulas: c.preds.iter().map(|&i| ps.get(i).formula.to_string()).collect(),
        num_vars: c.num_vars,
        score: c.score,
    }
}

fn format_config(r: &ConfigReport) -> String {
    format!("{{{}}}", r.formulas.join(", "))
}

/// Abstracts with `set`, which must cover the property's abstracted atoms,
/// and checks.
fn abstract_and_check(
    ts: &TransitionSystem,
    set: &PredicateSet,
    prop: &CtlProperty,
    limits: CheckLimits,
    timer: &mut Timer,
) -> Result<Verdict, CliError> {
    let abs = timer.time("abstract", || abstract_system(ts, set))?;
    let ap = timer.time("abstract", || abstract_property(prop, set, &ts.restriction))?;
    Ok(timer.time("check", || check(&abs, &ap, limits))?)
}

fn base_report(argv: &[String], m: &Loaded, ps: &PredicateSet) -> RunReport {
    RunReport {
        command: argv.iter().skip(1).cloned().collect(),
        model_sha256: m.sha256.clone(),
        model: m.template.name.clone(),
        predicates: ps.iter().map(|p| p.formula.to_string()).collect(),
        ..Default::default()
    }
}

fn emit(report: &RunReport, out: &OutputArgs) -> Result<(), CliError> {
    if let Some(path) = &out.emit {
        let text = serde_json::to_string_pretty(report).expect("report serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(cmd: Command, argv: &[String]) -> Result<i32, CliError> {
    let mut timer = Timer(BTreeMap::new());
    match cmd {
        Command::Check {
            model,
            n,
            prop,
            preds,
            limits,
            out,
        } => {
            let limits = limits.limits()?;
            let m = timer.time("parse", || load(&model.model))?;
            let ts = instance(&m, n)?;
            let prop = property(&ts, &prop)?;
            let (ps, verdict) = match preds {
                None => {
                    let v = timer.time("check", || check(&ts, &prop, limits))?;
                    (PredicateSet::default(), v)
                }
                Some(source) => {
                    let ps = predicates(&ts, &source, &prop)?;
                    let v = abstract_and_check(&ts, &ps, &prop, limits, &mut timer)?;
                    (ps, v)
                }
            };
            println!("{}", describe_verdict(&verdict));
            let mut report = base_report(argv, &m, &ps);
            report.seed = out.seed;
            report.verdicts.insert(format!("n={}", ts_size(&m, n)), VerdictReport::from(&verdict));
            report.timings = timer.0;
            emit(&report, &out)?;
            Ok(exit_code(&verdict))
        }
        Command::Abstract {
            model,
            n,
            preds,
            prop,
            out,
        } => {
            let m = timer.time("parse", || load(&model.model))?;
            let ts = instance(&m, n)?;
            let prop = match &prop {
                Some(p) => Some(property(&ts, p)?),
                None => None,
            };
            let anchor = prop.clone().unwrap_or_else(|| CtlProperty::ag(predkit_core::formula::Formula::tt()));
            let ps = predicates(&ts, &preds, &anchor)?;
            let abs = timer.time("abstract", || abstract_system(&ts, &ps))?;
            print!("{}", abs.to_model_text());
            if let Some(p) = &prop {
                let ap = abstract_property(p, &ps, &ts.restriction)?;
                println!("// property: {ap}");
            }
            let mut report = base_report(argv, &m, &ps);
            report.seed = out.seed;
            report.timings = timer.0;
            emit(&report, &out)?;
            Ok(0)
        }
        Command::Trlimp {
            model,
            n,
            preds,
            prop,
            k,
            no_scope_exclusion,
            out,
        } => {
            check_k(k)?;
            let m = timer.time("parse", || load(&model.model))?;
            let ts = instance(&m, n)?;
            let anchor = match &prop {
                Some(p) => property(&ts, p)?,
                None => CtlProperty::ag(predkit_core::formula::Formula::tt()),
            };
            let ps = timer.time("extract", || predicates(&ts, &preds, &anchor))?;
            let scores = timer.time("score", || comp_trans_level_imp(&ts, &ps));
            let opts = TrlimpOptions {
                scope_exclusion: !no_scope_exclusion,
            };
            let chosen = timer.time("choose", || choose_preds_trlimp(&ps, &scores, k, opts));
            let mut report = base_report(argv, &m, &ps);
            report.seed = out.seed;
            report.scores = Some(ScoresReport::new(&scores));
            report.config = chosen.as_ref().ok().map(|c| config_report(&ps, c));
            report.timings = timer.0;
            print!("{}", render(&report));
            emit(&report, &out)?;
            chosen?;
            Ok(0)
        }
        Command::Compat {
            model,
            small_n,
            preds,
            prop,
            k,
            jobs,
            limits,
            out,
        } => {
            check_k(k)?;
            let limits = limits.limits()?;
            let m = timer.time("parse", || load(&model.model))?;
            let small = instance(&m, Some(small_n))?;
            let prop = property(&small, &prop)?;
            let ps = timer.time("extract", || predicates(&small, &preds, &prop))?;
            let matrix = timer.time("compat", || compute_compatibility(&small, &ps, &prop, limits, jobs))?;
            let chosen = timer.time("choose", || choose_preds_compat(&ps, &matrix, k));
            let mut report = base_report(argv, &m, &ps);
            report.seed = out.seed;
            report.compat = Some(CompatReport::new(&matrix));
            report.config = chosen.as_ref().ok().map(|c| config_report(&ps, c));
            report.timings = timer.0;
            print!("{}", render(&report));
            emit(&report, &out)?;
            chosen?;
            Ok(0)
        }
        Command::Choose {
            heuristic,
            model,
            small_n,
            n,
            prop,
            preds,
            k,
            jobs,
            no_scope_exclusion,
            limits,
            out,
        } => {
            check_k(k)?;
            let limits = limits.limits()?;
            let m = timer.time("parse", || load(&model.model))?;
            let large = instance(&m, n)?;
            let large_prop = property(&large, &prop)?;
            let mut report;
            let (ps, chosen) = match heuristic {
                Heuristic::Compat => {
                    let small = instance(&m, Some(small_n))?;
                    let small_prop = property(&small, &prop)?;
                    let ps = timer.time("extract", || predicates(&small, &preds, &small_prop))?;
                    let matrix =
                        timer.time("compat", || compute_compatibility(&small, &ps, &small_prop, limits, jobs))?;
                    let chosen = timer.time("choose", || choose_preds_compat(&ps, &matrix, k));
                    report = base_report(argv, &m, &ps);
                    report.compat = Some(CompatReport::new(&matrix));
                    (ps, chosen)
                }
                Heuristic::Trlimp => {
                    let ps = timer.time("extract", || predicates(&large, &preds, &large_prop))?;
                    let scores = timer.time("score", || comp_trans_level_imp(&large, &ps));
                    let opts = TrlimpOptions {
                        scope_exclusion: !no_scope_exclusion,
                    };
                    let chosen = timer.time("choose", || choose_preds_trlimp(&ps, &scores, k, opts));
                    report = base_report(argv, &m, &ps);
                    report.scores = Some(ScoresReport::new(&scores));
                    (ps, chosen)
                }
            };
            report.seed = out.seed;
            let chosen = match chosen {
                Ok(c) => c,
                Err(e) => {
                    report.timings = timer.0;
                    emit(&report, &out)?;
                    return Err(e.into());
                }
            };
            let cr = config_report(&ps, &chosen);
            let (set, added) = augmented(&ps, &chosen.preds, &large_prop);
            let verdict = abstract_and_check(&large, &set, &large_prop, limits, &mut timer)?;
            println!("candidates: {}", ps.len());
            println!("chosen: {} (score {}, variables {})", format_config(&cr), cr.score, cr.num_vars);
            if !added.is_empty() {
                let names: Vec<String> = added.iter().map(|f| f.to_string()).collect();
                println!("property predicates added: {}", names.join(", "));
            }
            println!("n={}: {}", ts_size(&m, n), describe_verdict(&verdict));
            report.config = Some(cr);
            report.verdicts.insert(format!("n={}", ts_size(&m, n)), VerdictReport::from(&verdict));
            report.timings = timer.0;
            emit(&report, &out)?;
            Ok(exit_code(&verdict))
        }
        Command::Report { file } => {
            let text = fs::read_to_string(&file).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
            let report: RunReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
            print!("{}", render(&report));
            Ok(0)
        }
    }
}

fn ts_size(m: &Loaded, n: Option<usize>) -> usize {
    n.unwrap_or(m.template.default_n)
}
