use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use super::parse::{self, Ast, Parsed, Pos, TempOp, TransDecl, Update, VarDecl};
use super::property::CtlProperty;
use super::{Transition, TransitionSystem};
use crate::formula::{CmpOp, Formula, LinExpr, VarId, VarKind};
use crate::Error;

/// A parsed model with one optional process template that is replicated
/// on instantiation.
#[derive(Debug, Clone)]
pub struct ModelTemplate {
    pub name: String,
    pub default_n: usize,
    parsed: Parsed,
    labels: BTreeMap<String, i64>,
}

enum Resolved {
    Var(VarId),
    Const(BigInt),
}

/// Name lookup for one instantiation context.
pub(crate) struct Scope<'a> {
    vars: BTreeMap<String, VarId>,
    labels: &'a BTreeMap<String, i64>,
    allow_next: bool,
}

impl<'a> Scope<'a> {
    pub(crate) fn for_system(ts: &'a TransitionSystem) -> Scope<'a> {
        Scope {
            vars: ts
                .vars
                .iter()
                .map(|v| (v.name().to_string(), v.clone()))
                .collect(),
            labels: &ts.constants,
            allow_next: false,
        }
    }

    pub(crate) fn allow_next_state(&mut self) {
        self.allow_next = true;
    }

    fn resolve(&self, name: &str, primed: bool, pos: Pos) -> Result<Resolved, Error> {
        if let Some(v) = self.vars.get(name) {
            if primed && !self.allow_next {
                return Err(pos.error(format!("next-state variable `{name}'` in a state formula")));
            }
            return Ok(Resolved::Var(if primed { v.primed() } else { v.clone() }));
        }
        if let Some(c) = self.labels.get(name) {
            if primed {
                return Err(pos.error(format!("constant `{name}` cannot be primed")));
            }
            return Ok(Resolved::Const((*c).into()));
        }
        Err(Error::Kind(format!(
            "{}:{}: undeclared variable `{name}`",
            pos.line, pos.col
        )))
    }

    fn is_bool_valued(&self, ast: &Ast) -> bool {
        match ast {
            Ast::Bool(_) | Ast::Not(_) | Ast::And(..) | Ast::Or(..) | Ast::Implies(..) | Ast::Iff(..) => true,
            Ast::Cmp(..) | Ast::Divides(..) => true,
            Ast::Name { name, .. } => self.vars.get(name).is_some_and(VarId::is_bool),
            _ => false,
        }
    }

    pub(crate) fn term(&self, ast: &Ast) -> Result<LinExpr, Error> {
        Ok(match ast {
            Ast::Int(n) => LinExpr::constant(n.clone()),
            Ast::Name { name, primed, pos } => match self.resolve(name, *primed, *pos)? {
                Resolved::Const(c) => LinExpr::constant(c),
                Resolved::Var(v) if v.kind().is_numeric() => LinExpr::var(v),
                Resolved::Var(_) => {
                    return Err(Error::Kind(format!(
                        "{}:{}: boolean variable `{name}` used in arithmetic",
                        pos.line, pos.col
                    )))
                }
            },
            Ast::Neg(a) => self.term(a)?.neg(),
            Ast::Add(a, b) => self.term(a)?.add(&self.term(b)?),
            Ast::Sub(a, b) => self.term(a)?.sub(&self.term(b)?),
            Ast::Mul(a, b, pos) => {
                let (x, y) = (self.term(a)?, self.term(b)?);
                if x.is_constant() {
                    y.scale(x.constant_part())
                } else if y.is_constant() {
                    x.scale(y.constant_part())
                } else {
                    return Err(pos.error("non-linear product"));
                }
            }
            Ast::Temporal(_, _, pos) => return Err(pos.error("temporal operator in a term")),
            Ast::Divides(_, _, pos) | Ast::Cmp(_, _, _, pos) => {
                return Err(pos.error("formula used where a term is expected"))
            }
            Ast::Bool(_) | Ast::Not(_) | Ast::And(..) | Ast::Or(..) | Ast::Implies(..) | Ast::Iff(..) => {
                return Err(Error::Kind("formula used where a term is expected".into()))
            }
        })
    }

    pub(crate) fn formula(&self, ast: &Ast) -> Result<Formula, Error> {
        Ok(match ast {
            Ast::Bool(b) => Formula::from_bool(*b),
            Ast::Name { name, primed, pos } => match self.resolve(name, *primed, *pos)? {
                Resolved::Var(v) if v.is_bool() => Formula::boolean(v, true),
                _ => {
                    return Err(Error::Kind(format!(
                        "{}:{}: `{name}` is not a boolean",
                        pos.line, pos.col
                    )))
                }
            },
            Ast::Not(a) => self.formula(a)?.not(),
            Ast::And(a, b) => self.formula(a)?.and(&self.formula(b)?),
            Ast::Or(a, b) => self.formula(a)?.or(&self.formula(b)?),
            Ast::Implies(a, b) => self.formula(a)?.implies(&self.formula(b)?),
            Ast::Iff(a, b) => self.formula(a)?.iff(&self.formula(b)?),
            Ast::Cmp(op, a, b, pos) => {
                if self.is_bool_valued(a) || self.is_bool_valued(b) {
                    let (x, y) = (self.formula(a)?, self.formula(b)?);
                    match op {
                        CmpOp::Eq => x.iff(&y),
                        CmpOp::Ne => x.iff(&y).not(),
                        _ => return Err(pos.error("ordering comparison between booleans")),
                    }
                } else {
                    Formula::cmp(&self.term(a)?, *op, &self.term(b)?)
                }
            }
            Ast::Divides(m, e, _) => {
                Formula::lit(crate::formula::Atom::divides(m.clone(), self.term(e)?, true))
            }
            Ast::Temporal(_, _, pos) => {
                return Err(pos.error("temporal operator in a state formula"))
            }
            Ast::Int(_) | Ast::Neg(_) | Ast::Add(..) | Ast::Sub(..) | Ast::Mul(..) => {
                return Err(Error::Kind("term used where a formula is expected".into()))
            }
        })
    }

    pub(crate) fn property(&self, ast: &Ast) -> Result<CtlProperty, Error> {
        if !ast.is_temporal() {
            return Ok(CtlProperty::Atom(self.formula(ast)?));
        }
        let b = |a: &Ast| self.property(a).map(Box::new);
        Ok(match ast {
            Ast::Not(a) => CtlProperty::Not(b(a)?),
            Ast::And(x, y) => CtlProperty::And(b(x)?, b(y)?),
            Ast::Or(x, y) => CtlProperty::Or(b(x)?, b(y)?),
            Ast::Implies(x, y) => CtlProperty::Or(Box::new(CtlProperty::Not(b(x)?)), b(y)?),
            Ast::Iff(x, y) => {
                let (p, q) = (self.property(x)?, self.property(y)?);
                let both = CtlProperty::And(Box::new(p.clone()), Box::new(q.clone()));
                let neither = CtlProperty::And(
                    Box::new(CtlProperty::Not(Box::new(p))),
                    Box::new(CtlProperty::Not(Box::new(q))),
                );
                CtlProperty::Or(Box::new(both), Box::new(neither))
            }
            Ast::Temporal(op, args, _) => match op {
                TempOp::AX => CtlProperty::AX(b(&args[0])?),
                TempOp::AF => CtlProperty::AF(b(&args[0])?),
                TempOp::AG => CtlProperty::AG(b(&args[0])?),
                TempOp::EX => CtlProperty::EX(b(&args[0])?),
                TempOp::EF => CtlProperty::EF(b(&args[0])?),
                TempOp::EG => CtlProperty::EG(b(&args[0])?),
                TempOp::AU => CtlProperty::AU(b(&args[0])?, b(&args[1])?),
                TempOp::EU => CtlProperty::EU(b(&args[0])?, b(&args[1])?),
            },
            _ => return Err(Error::Kind("temporal operator inside an arithmetic expression".into())),
        })
    }
}

fn collect_labels(parsed: &Parsed) -> Result<BTreeMap<String, i64>, Error> {
    let mut labels: BTreeMap<String, i64> = BTreeMap::new();
    let blocks = std::iter::once(&parsed.shared).chain(parsed.process.as_ref().map(|(b, _)| b));
    let mut names = BTreeSet::new();
    for block in blocks {
        for d in &block.vars {
            if !names.insert(d.name.clone()) {
                return Err(d.pos.error(format!("variable `{}` declared twice", d.name)));
            }
            for (i, l) in d.labels.iter().enumerate() {
                match labels.insert(l.clone(), i as i64) {
                    Some(prev) if prev != i as i64 => {
                        return Err(d.pos.error(format!(
                            "label `{l}` has different positions in two enumerations"
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    for n in &names {
        if labels.contains_key(n) {
            return Err(Error::Kind(format!("`{n}` is both a variable and a label")));
        }
    }
    Ok(labels)
}

impl ModelTemplate {
    pub fn parse(src: &str) -> Result<ModelTemplate, Error> {
        let parsed = parse::parse_source(src)?;
        let labels = collect_labels(&parsed)?;
        let has_transitions = !parsed.shared.transitions.is_empty()
            || parsed
                .process
                .as_ref()
                .is_some_and(|(b, _)| !b.transitions.is_empty());
        if !has_transitions {
            return Err(Error::NoTransitions);
        }
        let default_n = parsed.processes.map_or(1, |(n, _)| n);
        let tpl = ModelTemplate {
            name: if parsed.name.is_empty() {
                "model".to_string()
            } else {
                parsed.name.clone()
            },
            default_n,
            parsed,
            labels,
        };
        // surface kind errors eagerly
        tpl.instantiate(tpl.default_n.max(1))?;
        Ok(tpl)
    }

    pub fn has_processes(&self) -> bool {
        self.parsed.process.is_some()
    }

    pub fn shared_var_names(&self) -> Vec<&str> {
        self.parsed.shared.vars.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn local_var_names(&self) -> Vec<&str> {
        self.parsed
            .process
            .iter()
            .flat_map(|(b, _)| b.vars.iter().map(|d| d.name.as_str()))
            .collect()
    }

    pub fn process_transition_names(&self) -> Vec<&str> {
        self.parsed
            .process
            .iter()
            .flat_map(|(b, _)| b.transitions.iter().map(|t| t.name.as_str()))
            .collect()
    }

    /// Builds the system with `n` copies of the process template.
    pub fn instantiate(&self, n: usize) -> Result<TransitionSystem, Error> {
        assert!(n >= 1, "instantiate needs at least one process");
        let shared = &self.parsed.shared;
        let process = self.parsed.process.as_ref().map(|(b, _)| b);
        let copies = if process.is_some() { n } else { 0 };

        let mut vars: Vec<VarId> = Vec::new();
        let mut enums: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut declare = |d: &VarDecl, name: String| {
            if d.kind == VarKind::Enum {
                enums.insert(name.clone(), d.labels.clone());
            }
            vars.push(VarId::new(&name, d.kind));
        };
        for d in &shared.vars {
            declare(d, d.name.clone());
        }
        if let Some(p) = process {
            for i in 1..=copies {
                for d in &p.vars {
                    declare(d, local_name(&d.name, i));
                }
            }
        }

        let global_vars: BTreeMap<String, VarId> =
            vars.iter().map(|v| (v.name().to_string(), v.clone())).collect();
        let shared_scope = Scope {
            vars: shared
                .vars
                .iter()
                .map(|d| (d.name.clone(), global_vars[&d.name].clone()))
                .collect(),
            labels: &self.labels,
            allow_next: false,
        };
        let local_scope = |i: usize| {
            let mut m = shared_scope.vars.clone();
            for d in &process.expect("process block").vars {
                m.insert(d.name.clone(), global_vars[&local_name(&d.name, i)].clone());
            }
            Scope {
                vars: m,
                labels: &self.labels,
                allow_next: false,
            }
        };

        let mut init = Vec::new();
        let mut restriction = Vec::new();
        for v in &vars {
            if let Some(labels) = enums.get(v.name()) {
                let e = LinExpr::var(v.clone());
                restriction.push(
                    Formula::cmp(&e, CmpOp::Ge, &LinExpr::zero()).and(&Formula::cmp(
                        &e,
                        CmpOp::Le,
                        &LinExpr::constant(labels.len() as i64 - 1),
                    )),
                );
            }
        }
        for a in &shared.init {
            init.push(shared_scope.formula(a)?);
        }
        for a in &shared.restrict {
            restriction.push(shared_scope.formula(a)?);
        }
        let mut transitions = Vec::new();
        for t in &shared.transitions {
            transitions.push(build_transition(t, t.name.clone(), &shared_scope, &vars)?);
        }
        if let Some(p) = process {
            for i in 1..=copies {
                let scope = local_scope(i);
                for a in &p.init {
                    init.push(scope.formula(a)?);
                }
                for a in &p.restrict {
                    restriction.push(scope.formula(a)?);
                }
                for t in &p.transitions {
                    transitions.push(build_transition(t, local_name(&t.name, i), &scope, &vars)?);
                }
            }
        }
        let mut seen = BTreeSet::new();
        for t in &transitions {
            if !seen.insert(t.label.clone()) {
                return Err(Error::Kind(format!("duplicate transition label `{}`", t.label)));
            }
        }
        if transitions.is_empty() {
            return Err(Error::NoTransitions);
        }

        Ok(TransitionSystem {
            name: self.name.clone(),
            vars,
            enums,
            constants: self.labels.clone(),
            restriction: Formula::and_all(restriction),
            init: Formula::and_all(init),
            transitions,
        })
    }
}

fn local_name(name: &str, i: usize) -> String {
    format!("{name}_{i}")
}

fn build_transition(
    t: &TransDecl,
    label: String,
    scope: &Scope<'_>,
    all_vars: &[VarId],
) -> Result<Transition, Error> {
    let next_scope = Scope {
        vars: scope.vars.clone(),
        labels: scope.labels,
        allow_next: true,
    };
    let Some(updates) = &t.updates else {
        let relation = next_scope.formula(&t.guard)?;
        return Ok(Transition { label, relation });
    };
    let guard = scope.formula(&t.guard)?;
    let mut parts = vec![guard];
    let mut assigned: BTreeSet<VarId> = BTreeSet::new();
    for u in updates {
        let (name, pos) = u.target();
        let v = match scope.vars.get(name) {
            Some(v) => v.clone(),
            None => {
                return Err(Error::Kind(format!(
                    "{}:{}: update of undeclared variable `{name}`",
                    pos.line, pos.col
                )))
            }
        };
        if !assigned.insert(v.clone()) {
            return Err(pos.error(format!("`{name}` updated twice")));
        }
        let vn = v.primed();
        parts.push(match u {
            Update::Set { value, .. } => {
                if !v.is_bool() {
                    return Err(Error::Kind(format!(
                        "{}:{}: `{name}` is not a boolean",
                        pos.line, pos.col
                    )));
                }
                Formula::boolean(vn, *value)
            }
            Update::Assign { value, .. } => {
                if v.is_bool() {
                    Formula::boolean(vn, true).iff(&next_scope.formula(value)?)
                } else {
                    Formula::cmp(&LinExpr::var(vn), CmpOp::Eq, &next_scope.term(value)?)
                }
            }
        });
    }
    for v in all_vars {
        if !assigned.contains(v) {
            parts.push(frame(v));
        }
    }
    Ok(Transition {
        label,
        relation: Formula::and_all(parts),
    })
}

/// `v' = v`.
pub fn frame(v: &VarId) -> Formula {
    if v.is_bool() {
        Formula::boolean(v.primed(), true).iff(&Formula::boolean(v.clone(), true))
    } else {
        Formula::cmp(
            &LinExpr::var(v.primed()),
            CmpOp::Eq,
            &LinExpr::var(v.clone()),
        )
    }
}
