//! Seeded generators for small random systems, formulas and predicates.
#![allow(dead_code)]

use predkit_core::abstraction::PredicateSet;
use predkit_core::formula::Formula;
use predkit_core::model::{CtlProperty, ModelTemplate, TransitionSystem};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const BOX_HI: i64 = 3;

/// A linear term over the given variables with small coefficients.
pub fn term(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    let mut parts = Vec::new();
    for v in vars {
        match rng.gen_range(0..4) {
            0 => {}
            1 => parts.push(v.to_string()),
            2 => parts.push(format!("-{v}")),
            _ => parts.push(format!("{}*{v}", rng.gen_range(2..=3))),
        }
    }
    if parts.is_empty() {
        parts.push(vars.choose(rng).unwrap().to_string());
    }
    parts.join(" + ")
}

/// A comparison `term op c`.
pub fn atom(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    let op = ["<=", "<", ">=", ">", "=", "!="].choose(rng).unwrap();
    format!("{} {op} {}", term(rng, vars), rng.gen_range(-2..=4))
}

/// A conjunction or disjunction of one to three atoms, possibly with a
/// boolean literal.
pub fn state_formula(rng: &mut ChaCha8Rng, ints: &[&str], bools: &[&str]) -> String {
    let n = rng.gen_range(1..=3);
    let mut parts: Vec<String> = (0..n).map(|_| atom(rng, ints)).collect();
    if !bools.is_empty() && rng.gen_bool(0.4) {
        let b = bools.choose(rng).unwrap();
        parts.push(if rng.gen_bool(0.5) { b.to_string() } else { format!("!{b}") });
    }
    let sep = if rng.gen_bool(0.6) { " & " } else { " | " };
    parts.join(sep)
}

/// An update right-hand side for an integer variable.
fn int_update(rng: &mut ChaCha8Rng, v: &str, ints: &[&str]) -> String {
    match rng.gen_range(0..5) {
        0 => format!("{v} + 1"),
        1 => format!("{v} - 1"),
        2 => ints.choose(rng).unwrap().to_string(),
        3 => rng.gen_range(0..=BOX_HI).to_string(),
        _ => format!("{} - {v}", rng.gen_range(0..=BOX_HI)),
    }
}

/// Source of a system over `x, y` in `[0, 3]` and a boolean `p`. The
/// restriction is the box, so every reachable state stays inside it.
pub fn boxed_system_source(rng: &mut ChaCha8Rng) -> String {
    let ints = ["x", "y"];
    let mut src = String::from("model rnd;\nvar x, y : int;\nvar p : bool;\n");
    src += &format!("restrict 0 <= x & x <= {BOX_HI} & 0 <= y & y <= {BOX_HI};\n");
    let init = match rng.gen_range(0..3) {
        0 => format!("x = {} & y = {}", rng.gen_range(0..=BOX_HI), rng.gen_range(0..=BOX_HI)),
        1 => format!("x <= {} & !p", rng.gen_range(0..=BOX_HI)),
        _ => state_formula(rng, &ints, &["p"]),
    };
    src += &format!("init {init};\n");
    let nt = rng.gen_range(2..=3);
    for t in 0..nt {
        let guard = if rng.gen_bool(0.2) { "true".to_string() } else { state_formula(rng, &ints, &["p"]) };
        if rng.gen_bool(0.2) {
            // havoc one variable inside the box
            let (h, keep) = if rng.gen_bool(0.5) { ("x", "y") } else { ("y", "x") };
            src += &format!(
                "relation t{t}: ({guard}) & 0 <= {h}' & {h}' <= {BOX_HI} & {keep}' = {keep} & (p' <=> !p);\n"
            );
            continue;
        }
        let mut ups = Vec::new();
        for v in ints {
            if rng.gen_bool(0.6) {
                ups.push(format!("{v}' = {}", int_update(rng, v, &ints)));
            }
        }
        match rng.gen_range(0..4) {
            0 => ups.push("p' = !p".into()),
            1 => ups.push("p'".into()),
            2 => ups.push("!p'".into()),
            _ => {}
        }
        let ups = if ups.is_empty() { "skip".to_string() } else { ups.join(", ") };
        src += &format!("transition t{t}: {guard} -> {ups};\n");
    }
    src
}

pub fn parse(src: &str) -> TransitionSystem {
    let tpl = ModelTemplate::parse(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    tpl.instantiate(tpl.default_n).unwrap()
}

/// `AG(f)` or `AF(f)` over a random state formula.
pub fn ag_af_property(rng: &mut ChaCha8Rng, ts: &TransitionSystem) -> CtlProperty {
    let f = state_formula(rng, &["x", "y"], &["p"]);
    let text = if rng.gen_bool(0.5) { format!("AG({f})") } else { format!("AF({f})") };
    ts.parse_property(&text).unwrap()
}

/// A random ECTL formula of small depth.
pub fn ectl_property(rng: &mut ChaCha8Rng, ts: &TransitionSystem) -> CtlProperty {
    let a = state_formula(rng, &["x", "y"], &["p"]);
    let b = state_formula(rng, &["x", "y"], &["p"]);
    let text = match rng.gen_range(0..5) {
        0 => format!("EF({a})"),
        1 => format!("EX({a})"),
        2 => format!("EG({a})"),
        3 => format!("E[({a}) U ({b})]"),
        _ => format!("EF(({a}) & EX({b}))"),
    };
    ts.parse_property(&text).unwrap()
}

/// A predicate over exactly the given variables.
pub fn predicate(rng: &mut ChaCha8Rng, ts: &TransitionSystem, vars: &[&str]) -> Formula {
    loop {
        let mut parts = Vec::new();
        for v in vars {
            let c = *[1i64, -1, 2].choose(rng).unwrap();
            parts.push(format!("{c}*{v}"));
        }
        let op = ["<=", "=", ">="].choose(rng).unwrap();
        let text = format!("{} {op} {}", parts.join(" + "), rng.gen_range(-1..=3));
        let f = ts.parse_formula(&text).unwrap();
        if !f.is_true() && !f.is_false() && f.vars().len() == vars.len() {
            return f;
        }
    }
}

pub fn set(fs: Vec<Formula>, prefix: &str) -> PredicateSet {
    PredicateSet::with_prefix(fs, prefix)
}
