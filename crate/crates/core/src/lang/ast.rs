use std::fmt;

use crate::value::Const;

/// Declarations followed by a goal expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub decls: Vec<Declaration>,
    pub goal: Expression,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<&Declaration> {
        self.decls.iter().find(|d| d.name == name)
    }
}

/// `Name(x, y) := body`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Declaration {
    pub name: String,
    pub formals: Vec<String>,
    pub body: Expression,
}

/// The callee of a site call: a site by name, or a variable that will be
/// bound to a site reference.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Site(String),
    Var(String),
}

/// Actual parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Var(String),
    Lit(Const),
    Site(String),
    /// `x.i`: the `i`-th component of the tuple bound to `x`.
    Proj(String, usize),
}

impl Param {
    pub fn is_ground(&self) -> bool {
        matches!(self, Param::Lit(_) | Param::Site(_))
    }

    /// The constant this parameter denotes, if ground.
    pub fn to_const(&self) -> Option<Const> {
        match self {
            Param::Lit(c) => Some(c.clone()),
            Param::Site(s) => Some(Const::SiteRef(s.clone())),
            _ => None,
        }
    }

    /// The parameter denoting `c` (site references become site names).
    pub fn from_const(c: Const) -> Param {
        match c {
            Const::SiteRef(s) => Param::Site(s),
            c => Param::Lit(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expression {
    Silent,
    SiteCall {
        target: Target,
        params: Vec<Param>,
    },
    ExprCall {
        name: String,
        params: Vec<Param>,
    },
    Par(Box<Expression>, Box<Expression>),
    /// `left > x > right`: `x` is bound in `right`.
    Seq(Box<Expression>, String, Box<Expression>),
    /// `left < x < right`: `x` is bound in `left`.
    Where(Box<Expression>, String, Box<Expression>),
}

impl Expression {
    pub fn site(name: &str, params: Vec<Param>) -> Expression {
        Expression::SiteCall { target: Target::Site(name.to_string()), params }
    }

    pub fn call(name: &str, params: Vec<Param>) -> Expression {
        Expression::ExprCall { name: name.to_string(), params }
    }

    pub fn par(l: Expression, r: Expression) -> Expression {
        Expression::Par(Box::new(l), Box::new(r))
    }

    pub fn seq(l: Expression, x: &str, r: Expression) -> Expression {
        Expression::Seq(Box::new(l), x.to_string(), Box::new(r))
    }

    pub fn where_(l: Expression, x: &str, r: Expression) -> Expression {
        Expression::Where(Box::new(l), x.to_string(), Box::new(r))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expression::Silent | Expression::SiteCall { .. } | Expression::ExprCall { .. } => 1,
            Expression::Par(l, r) | Expression::Seq(l, _, r) | Expression::Where(l, _, r) => 1 + l.size() + r.size(),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::pretty_expr(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::pretty(self))
    }
}
