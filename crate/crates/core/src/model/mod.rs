//! Transition systems, the model language, CTL properties and candidate
//! predicate extraction.

mod parse;
mod property;
mod template;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use parse::Pos;
pub use property::{CtlProperty, Fragment};
pub use template::{frame, ModelTemplate};

use crate::abstraction::PredicateSet;
use crate::formula::{Atom, CmpOp, Formula, LinExpr, VarId, VarKind};
use crate::Error;

/// A labeled transition; its relation ranges over current and next-state
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub label: String,
    pub relation: Formula,
}

/// A Kripke structure given symbolically: variables, state-space
/// restriction, initial states and labeled transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    pub name: String,
    pub vars: Vec<VarId>,
    /// Labels of enumerated variables, keyed by variable name.
    pub enums: BTreeMap<String, Vec<String>>,
    /// Enumeration labels as integer constants.
    pub constants: BTreeMap<String, i64>,
    pub restriction: Formula,
    pub init: Formula,
    pub transitions: Vec<Transition>,
}

impl TransitionSystem {
    /// Parses a model and instantiates it at its declared process count.
    pub fn parse(src: &str) -> Result<TransitionSystem, Error> {
        let tpl = ModelTemplate::parse(src)?;
        tpl.instantiate(tpl.default_n)
    }

    pub fn var(&self, name: &str) -> Option<&VarId> {
        self.vars.iter().find(|v| v.name() == name)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.transitions.iter().map(|t| t.label.as_str()).collect()
    }

    pub fn transition(&self, label: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.label == label)
    }

    /// The full relation `R = ⋁ rᵢ`.
    pub fn relation(&self) -> Formula {
        Formula::or_all(self.transitions.iter().map(|t| t.relation.clone()))
    }

    /// Parses a state formula in the scope of this system.
    pub fn parse_formula(&self, text: &str) -> Result<Formula, Error> {
        let ast = parse::parse_expr(text)?;
        template::Scope::for_system(self).formula(&ast)
    }

    /// Parses a formula over current and next-state variables.
    pub fn parse_relation(&self, text: &str) -> Result<Formula, Error> {
        let ast = parse::parse_expr(text)?;
        let mut scope = template::Scope::for_system(self);
        scope.allow_next_state();
        scope.formula(&ast)
    }

    pub fn parse_property(&self, text: &str) -> Result<CtlProperty, Error> {
        CtlProperty::parse(text, self)
    }

    /// The range atoms `0 <= v` and `v <= max` contributed by enumerations.
    pub fn enum_range_atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for v in &self.vars {
            if let Some(labels) = self.enums.get(v.name()) {
                let e = LinExpr::var(v.clone());
                let lo = Formula::cmp(&e, CmpOp::Ge, &LinExpr::zero());
                let hi = Formula::cmp(&e, CmpOp::Le, &LinExpr::constant(labels.len() as i64 - 1));
                out.extend(lo.atoms());
                out.extend(hi.atoms());
            }
        }
        out
    }

    /// Prints the system in the model language; parsing the output yields
    /// an equivalent system.
    pub fn to_model_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {};", self.name);
        for v in &self.vars {
            let ty = match v.kind() {
                VarKind::Bool => "bool".to_string(),
                VarKind::Int => "int".to_string(),
                VarKind::Enum => match self.enums.get(v.name()) {
                    Some(l) => format!("{{{}}}", l.join(", ")),
                    None => "int".to_string(),
                },
            };
            let _ = writeln!(s, "var {} : {};", v.name(), ty);
        }
        let _ = writeln!(s, "restrict {};", self.restriction);
        let _ = writeln!(s, "init {};", self.init);
        for t in &self.transitions {
            let _ = writeln!(s, "relation {}: {};", t.label, t.relation);
        }
        s
    }
}

/// Distinct integer atoms of the initial condition, the restriction, the
/// current-state part of every transition, and the property leaves, in that
/// order. Boolean literals and enumeration range atoms are left out.
pub fn extract_candidate_predicates(ts: &TransitionSystem, prop: &CtlProperty) -> PredicateSet {
    let ranges = ts.enum_range_atoms();
    let mut seen: Vec<Atom> = Vec::new();
    let mut take = |f: &Formula| {
        for c in f.cubes() {
            for a in c.atoms() {
                if a.is_bool() || ranges.contains(a) || seen.contains(a) {
                    continue;
                }
                if a.vars().iter().any(VarId::is_next) {
                    continue;
                }
                seen.push(a.clone());
            }
        }
    };
    take(&ts.init);
    take(&ts.restriction);
    for t in &ts.transitions {
        take(&t.relation);
    }
    for leaf in prop.leaves() {
        take(leaf);
    }
    PredicateSet::new(seen.into_iter().map(Formula::atom).collect())
}
