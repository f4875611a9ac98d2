//! LTL formulas over named propositions, with parameterized definitions.
//!
//! Surface syntax: `true false ~ [] <> /\ \/ -> U` and propositions
//! `name` or `name(arg, ...)` with constant arguments. Precedence, tightest
//! first: unary operators, `/\`, `\/`, `U`, `->` (right-associative).

use std::collections::BTreeMap;
use std::fmt;

use crate::time::parse_rat;
use crate::value::Const;

/// An atomic proposition instance, e.g. `sold(1910)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prop {
    pub name: String,
    pub args: Vec<Const>,
}

impl Prop {
    pub fn new(name: impl Into<String>, args: Vec<Const>) -> Self {
        Prop { name: name.into(), args }
    }

    pub fn int(name: impl Into<String>, arg: i64) -> Self {
        Prop::new(name, vec![Const::Int(arg)])
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    False,
    Prop(Prop),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Always(Box<Ltl>),
    Eventually(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn prop(p: Prop) -> Self {
        Ltl::Prop(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ltl) -> Self {
        Ltl::Not(Box::new(f))
    }

    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Self {
        Ltl::Implies(Box::new(a), Box::new(b))
    }

    pub fn always(f: Ltl) -> Self {
        Ltl::Always(Box::new(f))
    }

    pub fn eventually(f: Ltl) -> Self {
        Ltl::Eventually(Box::new(f))
    }

    pub fn until(a: Ltl, b: Ltl) -> Self {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    /// Distinct propositions, in first-occurrence order.
    pub fn atoms(&self) -> Vec<Prop> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Prop>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Prop(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Ltl::Not(a) | Ltl::Always(a) | Ltl::Eventually(a) => a.collect_atoms(out),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Whether no temporal operator occurs.
    pub fn is_propositional(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Prop(_) => true,
            Ltl::Not(a) => a.is_propositional(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) => a.is_propositional() && b.is_propositional(),
            Ltl::Always(_) | Ltl::Eventually(_) | Ltl::Until(..) => false,
        }
    }

    /// Evaluates a propositional formula.
    pub fn eval_state(&self, val: &mut impl FnMut(&Prop) -> bool) -> bool {
        match self {
            Ltl::True => true,
            Ltl::False => false,
            Ltl::Prop(p) => val(p),
            Ltl::Not(a) => !a.eval_state(val),
            Ltl::And(a, b) => a.eval_state(val) && b.eval_state(val),
            Ltl::Or(a, b) => a.eval_state(val) || b.eval_state(val),
            Ltl::Implies(a, b) => !a.eval_state(val) || b.eval_state(val),
            // on a single state the temporal operators collapse
            Ltl::Always(a) | Ltl::Eventually(a) => a.eval_state(val),
            Ltl::Until(_, b) => b.eval_state(val),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Ltl::True | Ltl::False | Ltl::Prop(_) => 0,
            Ltl::Not(_) | Ltl::Always(_) | Ltl::Eventually(_) => 1,
            Ltl::And(..) => 2,
            Ltl::Or(..) => 3,
            Ltl::Until(..) => 4,
            Ltl::Implies(..) => 5,
        }
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // operands are parenthesized unless they bind strictly tighter
        let sub = |f: &mut fmt::Formatter<'_>, x: &Ltl, limit: u8| {
            if x.prec() < limit {
                write!(f, "{x}")
            } else {
                write!(f, "({x})")
            }
        };
        match self {
            Ltl::True => f.write_str("true"),
            Ltl::False => f.write_str("false"),
            Ltl::Prop(p) => write!(f, "{p}"),
            Ltl::Not(a) => {
                f.write_str("~ ")?;
                sub(f, a, 2)
            }
            Ltl::Always(a) => {
                f.write_str("[] ")?;
                sub(f, a, 2)
            }
            Ltl::Eventually(a) => {
                f.write_str("<> ")?;
                sub(f, a, 2)
            }
            Ltl::And(a, b) => {
                sub(f, a, 3)?;
                f.write_str(" /\\ ")?;
                sub(f, b, 2)
            }
            Ltl::Or(a, b) => {
                sub(f, a, 4)?;
                f.write_str(" \\/ ")?;
                sub(f, b, 3)
            }
            Ltl::Until(a, b) => {
                sub(f, a, 4)?;
                f.write_str(" U ")?;
                sub(f, b, 5)
            }
            Ltl::Implies(a, b) => {
                sub(f, a, 5)?;
                f.write_str(" -> ")?;
                sub(f, b, 6)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("formula error at offset {offset}: {msg}")]
pub struct LtlParseError {
    pub offset: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Rat(Const),
    Str(String),
    LParen,
    RParen,
    Comma,
    Not,
    Always,
    Eventually,
    And,
    Or,
    Implies,
    Eq,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, LtlParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, msg: &str| LtlParseError { offset, msg: msg.to_string() };
    while i < b.len() {
        let c = b[i];
        let start = i;
        let two = |s: &str| src[i..].starts_with(s);
        let tok = if c.is_ascii_whitespace() {
            i += 1;
            continue;
        } else if two("[]") {
            i += 2;
            Tok::Always
        } else if two("<>") {
            i += 2;
            Tok::Eventually
        } else if two("/\\") {
            i += 2;
            Tok::And
        } else if two("\\/") {
            i += 2;
            Tok::Or
        } else if two("->") {
            i += 2;
            Tok::Implies
        } else if c == b'~' {
            i += 1;
            Tok::Not
        } else if c == b'(' {
            i += 1;
            Tok::LParen
        } else if c == b')' {
            i += 1;
            Tok::RParen
        } else if c == b',' {
            i += 1;
            Tok::Comma
        } else if c == b'=' {
            i += 1;
            Tok::Eq
        } else if c == b'"' {
            i += 1;
            let mut s = String::new();
            loop {
                match b.get(i) {
                    None => return Err(err(start, "unterminated string")),
                    Some(b'"') => break,
                    Some(b'\\') => {
                        let e = src[i + 1..].chars().next().ok_or_else(|| err(i, "dangling escape"))?;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            other => other,
                        });
                        i += 1 + e.len_utf8();
                    }
                    Some(_) => {
                        let ch = src[i..].chars().next().expect("in bounds");
                        s.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            i += 1;
            Tok::Str(s)
        } else if c.is_ascii_digit() || (c == b'-' && b.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'/') {
                i += 1;
            }
            let text = &src[start..i];
            if text.contains('/') {
                let r = parse_rat(text).ok_or_else(|| err(start, "bad rational"))?;
                Tok::Rat(Const::number(r))
            } else {
                Tok::Int(text.parse().map_err(|_| err(start, "bad integer"))?)
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'\'') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            return Err(err(start, &format!("unexpected character `{}`", c as char)));
        };
        out.push((start, tok));
    }
    Ok(out)
}

/// A named, possibly parameterized formula: `commit(id) = hasBid(id) -> <> sold(id)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: String,
}

/// A set of formula definitions, expanded by name during parsing.
#[derive(Clone, Debug, Default)]
pub struct Definitions {
    defs: BTreeMap<String, Definition>,
}

const MAX_EXPANSION_DEPTH: usize = 64;

impl Definitions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `name(params) = body` or `name = body`. The body is checked
    /// lazily, when the definition is used.
    pub fn define(&mut self, src: &str) -> Result<(), LtlParseError> {
        let toks = lex(src)?;
        let mut p = Parser { src, toks: &toks, pos: 0, defs: self, env: BTreeMap::new(), depth: 0 };
        let name = p.ident()?;
        let mut params = Vec::new();
        if p.eat(&Tok::LParen) {
            loop {
                params.push(p.ident()?);
                if !p.eat(&Tok::Comma) {
                    break;
                }
            }
            p.expect(&Tok::RParen)?;
        }
        p.expect(&Tok::Eq)?;
        let at = p.offset();
        self.defs.insert(name.clone(), Definition { name, params, body: src[at..].trim().to_string() });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Parses a formula, expanding definitions.
    pub fn parse(&self, src: &str) -> Result<Ltl, LtlParseError> {
        parse_with(src, self, BTreeMap::new(), 0)
    }
}

/// Parses a formula with no definitions in scope.
pub fn parse_ltl(src: &str) -> Result<Ltl, LtlParseError> {
    Definitions::new().parse(src)
}

fn parse_with(src: &str, defs: &Definitions, env: BTreeMap<String, Const>, depth: usize) -> Result<Ltl, LtlParseError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks: &toks, pos: 0, defs, env, depth };
    let f = p.implies()?;
    if p.pos != toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    toks: &'a [(usize, Tok)],
    pos: usize,
    defs: &'a Definitions,
    env: BTreeMap<String, Const>,
    depth: usize,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |t| t.0)
    }

    fn error(&self, msg: &str) -> LtlParseError {
        LtlParseError { offset: self.offset(), msg: msg.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), LtlParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {t:?}")))
        }
    }

    fn ident(&mut self) -> Result<String, LtlParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s != "U" => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    fn implies(&mut self) -> Result<Ltl, LtlParseError> {
        let lhs = self.until()?;
        if self.eat(&Tok::Implies) {
            Ok(Ltl::implies(lhs, self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn until(&mut self) -> Result<Ltl, LtlParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Ident("U".into())) {
            self.pos += 1;
            Ok(Ltl::until(lhs, self.until()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Ltl, LtlParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = Ltl::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ltl, LtlParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = Ltl::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl, LtlParseError> {
        if self.eat(&Tok::Not) {
            return Ok(Ltl::not(self.unary()?));
        }
        if self.eat(&Tok::Always) {
            return Ok(Ltl::always(self.unary()?));
        }
        if self.eat(&Tok::Eventually) {
            return Ok(Ltl::eventually(self.unary()?));
        }
        if self.eat(&Tok::LParen) {
            let f = self.implies()?;
            self.expect(&Tok::RParen)?;
            return Ok(f);
        }
        let name = self.ident()?;
        match name.as_str() {
            "true" => return Ok(Ltl::True),
            "false" => return Ok(Ltl::False),
            _ => {}
        }
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.arg()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
        }
        match self.defs.get(&name) {
            Some(def) => self.expand(def, args),
            None => Ok(Ltl::Prop(Prop::new(name, args))),
        }
    }

    fn expand(&self, def: &Definition, args: Vec<Const>) -> Result<Ltl, LtlParseError> {
        if def.params.len() != args.len() {
            return Err(self.error(&format!(
                "`{}` expects {} arguments, got {}",
                def.name,
                def.params.len(),
                args.len()
            )));
        }
        if self.depth >= MAX_EXPANSION_DEPTH {
            return Err(self.error(&format!("definition `{}` expands too deeply", def.name)));
        }
        let env = def.params.iter().cloned().zip(args).collect();
        parse_with(&def.body, self.defs, env, self.depth + 1)
            .map_err(|e| self.error(&format!("in definition `{}`: {}", def.name, e)))
    }

    fn arg(&mut self) -> Result<Const, LtlParseError> {
        let t = self.peek().cloned();
        self.pos += 1;
        match t {
            Some(Tok::Int(i)) => Ok(Const::Int(i)),
            Some(Tok::Rat(c)) => Ok(c),
            Some(Tok::Str(s)) => Ok(Const::Str(s)),
            Some(Tok::Ident(x)) => match x.as_str() {
                "true" => Ok(Const::Bool(true)),
                "false" => Ok(Const::Bool(false)),
                "signal" => Ok(Const::Signal),
                _ => self.env.get(&x).cloned().ok_or_else(|| {
                    self.pos -= 1;
                    self.error(&format!("unbound parameter `{x}`"))
                }),
            },
            _ => {
                self.pos -= 1;
                Err(self.error("expected a constant argument"))
            }
        }
    }
}
