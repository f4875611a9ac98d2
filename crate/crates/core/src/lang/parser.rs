//! Recursive-descent parser.
//!
//! Precedence, tightest first: `>x>` / `>>` (right associative), `|` (left
//! associative), `<x<` (left associative). Call heads are resolved after
//! parsing: a declared name is an expression call, a variable in scope is a
//! site-valued variable, anything else is a site name. In parameter position
//! lowercase identifiers are variables and capitalized ones are site names.

use std::collections::{BTreeSet, HashSet};

use crate::value::Const;

use super::ast::{Declaration, Expression, Param, Program, Target};
use super::lexer::{lex, Tok, Token};
use super::syntax::free_vars;
use super::LangError;

const KEYWORDS: [&str; 3] = ["signal", "true", "false"];

pub fn is_variable_name(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_lowercase() || c == '_') && !KEYWORDS.contains(&name)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    fresh: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> LangError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self.toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1)),
        };
        LangError::Syntax { line, col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LangError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, LangError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn binder(&mut self) -> Result<String, LangError> {
        let x = self.ident("a variable")?;
        if !is_variable_name(&x) {
            self.pos -= 1;
            return Err(self.err(format!("`{x}` cannot be a variable (variables start lowercase)")));
        }
        Ok(x)
    }

    /// Does a declaration start here? `Ident [ '(' ... ')' ] Def`
    fn at_declaration(&self) -> bool {
        if !matches!(self.peek(), Some(Tok::Ident(_))) {
            return false;
        }
        match self.peek_at(1) {
            Some(Tok::Def) => true,
            Some(Tok::LParen) => {
                let mut k = 2;
                loop {
                    match self.peek_at(k) {
                        Some(Tok::RParen) => return self.peek_at(k + 1) == Some(&Tok::Def),
                        Some(Tok::Ident(_)) | Some(Tok::Comma) => k += 1,
                        _ => return false,
                    }
                }
            }
            _ => false,
        }
    }

    fn declaration(&mut self) -> Result<Declaration, LangError> {
        let name = self.ident("a declaration name")?;
        let mut formals = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    let x = self.binder()?;
                    if formals.contains(&x) {
                        self.pos -= 1;
                        return Err(self.err(format!("duplicate formal parameter `{x}`")));
                    }
                    formals.push(x);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        self.expect(Tok::Def, "`:=` or `=def`")?;
        let body = self.where_expr()?;
        Ok(Declaration { name, formals, body })
    }

    fn where_expr(&mut self) -> Result<Expression, LangError> {
        let mut left = self.par_expr()?;
        while self.peek() == Some(&Tok::Lt) {
            self.pos += 1;
            let x = self.binder()?;
            self.expect(Tok::Lt, "`<` closing the pruning binder")?;
            let right = self.par_expr()?;
            left = Expression::Where(Box::new(left), x, Box::new(right));
        }
        Ok(left)
    }

    fn par_expr(&mut self) -> Result<Expression, LangError> {
        let mut left = self.seq_expr()?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            let right = self.seq_expr()?;
            left = Expression::Par(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn seq_expr(&mut self) -> Result<Expression, LangError> {
        let left = self.primary()?;
        match self.peek() {
            Some(Tok::Gt) => {
                self.pos += 1;
                let x = self.binder()?;
                self.expect(Tok::Gt, "`>` closing the sequential binder")?;
                let right = self.seq_expr()?;
                Ok(Expression::Seq(Box::new(left), x, Box::new(right)))
            }
            Some(Tok::GtGt) => {
                self.pos += 1;
                let right = self.seq_expr()?;
                let x = self.fresh_binder(&right);
                Ok(Expression::Seq(Box::new(left), x, Box::new(right)))
            }
            _ => Ok(left),
        }
    }

    fn fresh_binder(&mut self, right: &Expression) -> String {
        let fv = free_vars(right);
        loop {
            let x = format!("_{}", self.fresh);
            self.fresh += 1;
            if !fv.contains(&x) {
                return x;
            }
        }
    }

    fn primary(&mut self) -> Result<Expression, LangError> {
        match self.peek().cloned() {
            Some(Tok::Int(0)) => {
                self.pos += 1;
                Ok(Expression::Silent)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.where_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.err(format!("`{name}` is a constant, not an expression")));
                }
                self.pos += 1;
                let params = if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    self.params()?
                } else {
                    Vec::new()
                };
                Ok(Expression::SiteCall { target: Target::Site(name), params })
            }
            _ => Err(self.err("expected an expression")),
        }
    }

    /// Parses a parameter list after `(`, consuming the closing `)`.
    fn params(&mut self) -> Result<Vec<Param>, LangError> {
        let mut ps = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(ps);
        }
        loop {
            ps.push(self.param()?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(ps),
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected `,` or `)` in parameter list"));
                }
            }
        }
    }

    fn param(&mut self) -> Result<Param, LangError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "signal" => return Ok(Param::Lit(Const::Signal)),
                    "true" => return Ok(Param::Lit(Const::Bool(true))),
                    "false" => return Ok(Param::Lit(Const::Bool(false))),
                    _ => {}
                }
                if !is_variable_name(&name) {
                    return Ok(Param::Site(name));
                }
                if self.peek() == Some(&Tok::Dot) {
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Int(i)) if i >= 0 => Ok(Param::Proj(name, i as usize)),
                        _ => {
                            self.pos -= 1;
                            Err(self.err("expected a tuple index after `.`"))
                        }
                    }
                } else {
                    Ok(Param::Var(name))
                }
            }
            _ => Ok(Param::Lit(self.literal()?)),
        }
    }

    fn literal(&mut self) -> Result<Const, LangError> {
        match self.next() {
            Some(Tok::Int(i)) => Ok(Const::Int(i)),
            Some(Tok::Rat(r)) => Ok(Const::Rat(r)),
            Some(Tok::Str(s)) => Ok(Const::Str(s)),
            Some(Tok::Ident(k)) if k == "signal" => Ok(Const::Signal),
            Some(Tok::Ident(k)) if k == "true" => Ok(Const::Bool(true)),
            Some(Tok::Ident(k)) if k == "false" => Ok(Const::Bool(false)),
            Some(Tok::LParen) => {
                let mut items = Vec::new();
                if self.peek() == Some(&Tok::RParen) {
                    self.pos += 1;
                    return Ok(Const::Tuple(items));
                }
                loop {
                    items.push(self.literal()?);
                    match self.next() {
                        Some(Tok::Comma) => {
                            if self.peek() == Some(&Tok::RParen) {
                                self.pos += 1;
                                return Ok(Const::Tuple(items));
                            }
                        }
                        Some(Tok::RParen) => return Ok(Const::Tuple(items)),
                        _ => {
                            self.pos -= 1;
                            return Err(self.err("expected `,` or `)` in tuple literal"));
                        }
                    }
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected a parameter"))
            }
        }
    }
}

/// Rewrites placeholder site-call heads into expression calls or
/// variable targets according to scope.
fn resolve(e: Expression, scope: &mut Vec<String>, decls: &HashSet<String>) -> Expression {
    match e {
        Expression::SiteCall { target: Target::Site(name), params } => {
            if scope.contains(&name) {
                Expression::SiteCall { target: Target::Var(name), params }
            } else if decls.contains(&name) {
                Expression::ExprCall { name, params }
            } else {
                Expression::SiteCall { target: Target::Site(name), params }
            }
        }
        Expression::Par(l, r) => {
            let l = resolve(*l, scope, decls);
            let r = resolve(*r, scope, decls);
            Expression::Par(Box::new(l), Box::new(r))
        }
        Expression::Seq(l, x, r) => {
            let l = resolve(*l, scope, decls);
            scope.push(x.clone());
            let r = resolve(*r, scope, decls);
            scope.pop();
            Expression::Seq(Box::new(l), x, Box::new(r))
        }
        Expression::Where(l, x, r) => {
            scope.push(x.clone());
            let l = resolve(*l, scope, decls);
            scope.pop();
            let r = resolve(*r, scope, decls);
            Expression::Where(Box::new(l), x, Box::new(r))
        }
        other => other,
    }
}

/// Parses an Orc program: `decl ; ... ; goal`.
pub fn parse(source: &str) -> Result<Program, LangError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, fresh: 0 };
    let mut decls: Vec<Declaration> = Vec::new();
    let mut goal = None;
    while p.peek().is_some() {
        if goal.is_some() {
            return Err(p.err("unexpected input after the goal expression"));
        }
        if p.at_declaration() {
            let at = p.pos;
            let d = p.declaration()?;
            if decls.iter().any(|o| o.name == d.name) {
                let t = &p.toks[at];
                return Err(LangError::DuplicateDeclaration { name: d.name, line: t.line, col: t.col });
            }
            decls.push(d);
            if p.peek() == Some(&Tok::Semi) {
                p.pos += 1;
            } else if p.peek().is_some() {
                return Err(p.err("expected `;` after declaration"));
            }
        } else {
            goal = Some(p.where_expr()?);
            if p.peek() == Some(&Tok::Semi) {
                p.pos += 1;
            }
        }
    }
    let goal = goal.ok_or_else(|| p.err("missing goal expression"))?;
    let names: HashSet<String> = decls.iter().map(|d| d.name.clone()).collect();
    let decls = decls
        .into_iter()
        .map(|d| {
            let mut scope = d.formals.clone();
            let body = resolve(d.body, &mut scope, &names);
            Declaration { body, ..d }
        })
        .collect();
    let goal = resolve(goal, &mut Vec::new(), &names);
    Ok(Program { decls, goal })
}

/// Parses a lone expression in the context of the given declaration names.
pub fn parse_expr(source: &str, decl_names: &[&str]) -> Result<Expression, LangError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, fresh: 0 };
    let e = p.where_expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected input after expression"));
    }
    let names = decl_names.iter().map(|s| s.to_string()).collect();
    Ok(resolve(e, &mut Vec::new(), &names))
}

/// Names called as expressions but not declared.
pub fn undeclared_calls(p: &Program) -> BTreeSet<String> {
    fn walk(e: &Expression, p: &Program, out: &mut BTreeSet<String>) {
        match e {
            Expression::ExprCall { name, .. } if p.decl(name).is_none() => {
                out.insert(name.clone());
            }
            Expression::Par(l, r) | Expression::Seq(l, _, r) | Expression::Where(l, _, r) => {
                walk(l, p, out);
                walk(r, p, out);
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    walk(&p.goal, p, &mut out);
    for d in &p.decls {
        walk(&d.body, p, &mut out);
    }
    out
}
