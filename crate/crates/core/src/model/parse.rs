//! Lexer and recursive-descent parser for the model language.
//!
//! ```text
//! model     := ["model" IDENT ";"] item*
//! item      := "processes" INT ";"
//!            | "var" IDENT ("," IDENT)* ":" type ";"
//!            | "init" expr ";" | "restrict" expr ";"
//!            | "transition" IDENT ":" expr "->" updates ";"
//!            | "relation" IDENT ":" expr ";"
//!            | "process" "{" item* "}"
//! type      := "int" | "bool" | "{" IDENT ("," IDENT)* "}"
//! updates   := "skip" | update ("," update)*
//! update    := IDENT "'" "=" expr | IDENT "'" | "!" IDENT "'"
//! expr      := iff
//! iff       := implies ("<=>" implies)*
//! implies   := or ("=>" implies)?
//! or        := and ("|" and)*
//! and       := unary ("&" unary)*
//! unary     := "!" unary | cmp
//! cmp       := sum (("="|"!="|"<"|"<="|">"|">=") sum)?
//! sum       := prod (("+"|"-") prod)*
//! prod      := neg ("*" neg)*
//! neg       := "-" neg | primary
//! primary   := INT | "true" | "false" | IDENT ["'"] | "(" expr ")"
//!            | "divides" "(" INT "," expr ")"
//!            | ("AG"|"AF"|"AX"|"EG"|"EF"|"EX") "(" expr ")"
//!            | ("A"|"E") "[" expr "U" expr "]"
//! ```
//!
//! Line comments start with `//`.

use num_bigint::BigInt;

use crate::formula::{CmpOp, VarKind};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub(crate) fn error(self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[&str] = &[
    "<=>", "->", "=>", "!=", "<=", ">=", ";", ":", ",", "{", "}", "(", ")", "[", "]", "'", "=", "<", ">",
    "+", "-", "*", "!", "&", "|",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, Error> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    'outer: while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Int(text.parse().expect("digits")), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        for s in SYMBOLS {
            let n = s.chars().count();
            if chars[i..].iter().take(n).copied().eq(s.chars()) {
                i += n;
                col += n;
                out.push((Tok::Sym(s), pos));
                continue 'outer;
            }
        }
        return Err(pos.error(format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TempOp {
    AX,
    AF,
    AG,
    AU,
    EX,
    EF,
    EG,
    EU,
}

/// Untyped expression tree; typing happens when names are resolved.
#[derive(Debug, Clone)]
pub enum Ast {
    Int(BigInt),
    Bool(bool),
    Name { name: String, primed: bool, pos: Pos },
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>, Pos),
    Cmp(CmpOp, Box<Ast>, Box<Ast>, Pos),
    Not(Box<Ast>),
    And(Box<Ast>, Box<Ast>),
    Or(Box<Ast>, Box<Ast>),
    Implies(Box<Ast>, Box<Ast>),
    Iff(Box<Ast>, Box<Ast>),
    Divides(BigInt, Box<Ast>, Pos),
    Temporal(TempOp, Vec<Ast>, Pos),
}

impl Ast {
    pub fn is_temporal(&self) -> bool {
        match self {
            Ast::Temporal(..) => true,
            Ast::Int(_) | Ast::Bool(_) | Ast::Name { .. } => false,
            Ast::Neg(a) | Ast::Not(a) | Ast::Divides(_, a, _) => a.is_temporal(),
            Ast::Add(a, b)
            | Ast::Sub(a, b)
            | Ast::Mul(a, b, _)
            | Ast::Cmp(_, a, b, _)
            | Ast::And(a, b)
            | Ast::Or(a, b)
            | Ast::Implies(a, b)
            | Ast::Iff(a, b) => a.is_temporal() || b.is_temporal(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub labels: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub enum Update {
    /// `x' = e` for integers, `b' = f` for booleans.
    Assign { name: String, value: Ast, pos: Pos },
    /// `b'` or `!b'`.
    Set { name: String, value: bool, pos: Pos },
}

impl Update {
    pub fn target(&self) -> (&str, Pos) {
        match self {
            Update::Assign { name, pos, .. } | Update::Set { name, pos, .. } => (name, *pos),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransDecl {
    pub name: String,
    pub guard: Ast,
    /// `None` for a raw `relation`, which gets no frame condition.
    pub updates: Option<Vec<Update>>,
}

#[derive(Debug, Clone, Default)]
pub struct Block {
    pub vars: Vec<VarDecl>,
    pub init: Vec<Ast>,
    pub restrict: Vec<Ast>,
    pub transitions: Vec<TransDecl>,
}

#[derive(Debug, Clone, Default)]
pub struct Parsed {
    pub name: String,
    pub processes: Option<(usize, Pos)>,
    pub shared: Block,
    pub process: Option<(Block, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<Pos, Error> {
        let pos = self.pos();
        if self.eat_sym(s) {
            Ok(pos)
        } else {
            Err(pos.error(format!("expected `{s}`, found {}", describe(self.peek()))))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), Error> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(self.pos().error(format!("expected `{w}`, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), Error> {
        match self.bump() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(p.error(format!("expected identifier, found {}", describe(&t)))),
        }
    }

    fn int(&mut self) -> Result<(BigInt, Pos), Error> {
        match self.bump() {
            (Tok::Int(n), p) => Ok((n, p)),
            (t, p) => Err(p.error(format!("expected integer, found {}", describe(&t)))),
        }
    }

    fn model(&mut self) -> Result<Parsed, Error> {
        let mut out = Parsed::default();
        if self.is_word("model") {
            self.bump();
            out.name = self.ident()?.0;
            self.expect_sym(";")?;
        }
        loop {
            if matches!(self.peek(), Tok::Eof) {
                return Ok(out);
            }
            if self.is_word("processes") {
                let p = self.pos();
                self.bump();
                let (n, np) = self.int()?;
                let n: usize = n
                    .try_into()
                    .ok()
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| np.error("process count must be at least 1"))?;
                self.expect_sym(";")?;
                out.processes = Some((n, p));
            } else if self.is_word("process") {
                let p = self.pos();
                self.bump();
                if out.process.is_some() {
                    return Err(p.error("only one process template is allowed"));
                }
                self.expect_sym("{")?;
                let mut block = Block::default();
                while !self.eat_sym("}") {
                    if matches!(self.peek(), Tok::Eof) {
                        return Err(self.pos().error("unterminated process block"));
                    }
                    self.item(&mut block)?;
                }
                out.process = Some((block, p));
            } else {
                self.item(&mut out.shared)?;
            }
        }
    }

    fn item(&mut self, block: &mut Block) -> Result<(), Error> {
        let (word, pos) = self.ident()?;
        match word.as_str() {
            "var" => {
                let mut names = vec![self.ident()?];
                while self.eat_sym(",") {
                    names.push(self.ident()?);
                }
                self.expect_sym(":")?;
                let (kind, labels) = if self.eat_sym("{") {
                    let mut labels = vec![self.ident()?.0];
                    while self.eat_sym(",") {
                        labels.push(self.ident()?.0);
                    }
                    self.expect_sym("}")?;
                    (VarKind::Enum, labels)
                } else {
                    let (ty, tp) = self.ident()?;
                    match ty.as_str() {
                        "int" => (VarKind::Int, Vec::new()),
                        "bool" => (VarKind::Bool, Vec::new()),
                        other => return Err(tp.error(format!("unknown type `{other}`"))),
                    }
                };
                self.expect_sym(";")?;
                for (name, pos) in names {
                    block.vars.push(VarDecl {
                        name,
                        kind,
                        labels: labels.clone(),
                        pos,
                    });
                }
            }
            "init" => {
                block.init.push(self.expr()?);
                self.expect_sym(";")?;
            }
            "restrict" => {
                block.restrict.push(self.expr()?);
                self.expect_sym(";")?;
            }
            "transition" => {
                let (name, _) = self.ident()?;
                self.expect_sym(":")?;
                let guard = self.expr()?;
                self.expect_sym("->")?;
                let mut updates = Vec::new();
                if self.is_word("skip") {
                    self.bump();
                } else {
                    updates.push(self.update()?);
                    while self.eat_sym(",") {
                        updates.push(self.update()?);
                    }
                }
                self.expect_sym(";")?;
                block.transitions.push(TransDecl {
                    name,
                    guard,
                    updates: Some(updates),
                });
            }
            "relation" => {
                let (name, _) = self.ident()?;
                self.expect_sym(":")?;
                let guard = self.expr()?;
                self.expect_sym(";")?;
                block.transitions.push(TransDecl {
                    name,
                    guard,
                    updates: None,
                });
            }
            other => return Err(pos.error(format!("unexpected `{other}`"))),
        }
        Ok(())
    }

    fn update(&mut self) -> Result<Update, Error> {
        if self.eat_sym("!") {
            let (name, pos) = self.ident()?;
            self.expect_sym("'")?;
            return Ok(Update::Set {
                name,
                value: false,
                pos,
            });
        }
        let (name, pos) = self.ident()?;
        self.expect_sym("'")?;
        if self.eat_sym("=") {
            let value = self.expr()?;
            Ok(Update::Assign { name, value, pos })
        } else {
            Ok(Update::Set {
                name,
                value: true,
                pos,
            })
        }
    }

    fn expr(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.implies()?;
        while self.eat_sym("<=>") {
            let rhs = self.implies()?;
            lhs = Ast::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Ast, Error> {
        let lhs = self.or()?;
        if self.eat_sym("=>") {
            let rhs = self.implies()?;
            return Ok(Ast::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.and()?;
        while self.eat_sym("|") {
            let rhs = self.and()?;
            lhs = Ast::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.unary()?;
        while self.eat_sym("&") {
            let rhs = self.unary()?;
            lhs = Ast::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, Error> {
        if self.eat_sym("!") {
            return Ok(Ast::Not(Box::new(self.unary()?)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Ast, Error> {
        let lhs = self.sum()?;
        let ops = [
            ("=", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ];
        for (s, op) in ops {
            if self.is_sym(s) {
                let pos = self.pos();
                self.bump();
                let rhs = self.sum()?;
                return Ok(Ast::Cmp(op, Box::new(lhs), Box::new(rhs), pos));
            }
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.prod()?;
        loop {
            if self.eat_sym("+") {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.prod()?));
            } else if self.is_sym("-") {
                self.bump();
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.prod()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn prod(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.neg()?;
        while self.is_sym("*") {
            let pos = self.pos();
            self.bump();
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.neg()?), pos);
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> Result<Ast, Error> {
        if self.eat_sym("-") {
            return Ok(Ast::Neg(Box::new(self.neg()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Ast, Error> {
        let pos = self.pos();
        match self.bump().0 {
            Tok::Int(n) => Ok(Ast::Int(n)),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) => match w.as_str() {
                "true" => Ok(Ast::Bool(true)),
                "false" => Ok(Ast::Bool(false)),
                "divides" if self.is_sym("(") => {
                    self.bump();
                    let (m, mp) = self.int()?;
                    if m == BigInt::from(0) {
                        return Err(mp.error("divisibility by zero"));
                    }
                    self.expect_sym(",")?;
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(Ast::Divides(m, Box::new(e), pos))
                }
                "AG" | "AF" | "AX" | "EG" | "EF" | "EX" if self.is_sym("(") => {
                    let op = match w.as_str() {
                        "AG" => TempOp::AG,
                        "AF" => TempOp::AF,
                        "AX" => TempOp::AX,
                        "EG" => TempOp::EG,
                        "EF" => TempOp::EF,
                        _ => TempOp::EX,
                    };
                    self.bump();
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(Ast::Temporal(op, vec![e], pos))
                }
                "A" | "E" if self.is_sym("[") => {
                    self.bump();
                    let lhs = self.expr()?;
                    self.expect_word("U")?;
                    let rhs = self.expr()?;
                    self.expect_sym("]")?;
                    let op = if w == "A" { TempOp::AU } else { TempOp::EU };
                    Ok(Ast::Temporal(op, vec![lhs, rhs], pos))
                }
                _ => {
                    let primed = self.eat_sym("'");
                    Ok(Ast::Name {
                        name: w,
                        primed,
                        pos,
                    })
                }
            },
            t => Err(pos.error(format!("unexpected {}", describe(&t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

pub fn parse_source(src: &str) -> Result<Parsed, Error> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
    };
    p.model()
}

/// Parses a standalone expression (formula, term or temporal property).
pub fn parse_expr(src: &str) -> Result<Ast, Error> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
    };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.pos().error(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_position() {
        let err = parse_source("model m;\nvar x : int;\ninit x = = 1;").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 3,
                col: 10,
                msg: "unexpected `=`".into()
            }
        );
    }

    #[test]
    fn temporal_operators_parse() {
        let e = parse_expr("AG(z <= 1) & A[x = 0 U !b]").unwrap();
        assert!(e.is_temporal());
        assert!(!parse_expr("x + 2*y <= 3 => b").unwrap().is_temporal());
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse_source("// header\nvar x : int; // trailing\n").unwrap();
        assert_eq!(p.shared.vars.len(), 1);
    }
}
