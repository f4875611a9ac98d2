//! Concrete syntax, AST and syntactic utilities for Orc programs.
//!
//! ```text
//! program ::= (decl ;)* expr
//! decl    ::= Name(x, ...) := expr        -- `=def` is accepted for `:=`
//! expr    ::= 0 | M(p, ...) | E(p, ...) | expr | expr
//!           | expr > x > expr | expr >> expr | expr < x < expr | (expr)
//! param   ::= x | x.i | Site | 7 | -2 | 7/2 | "str" | signal | true | false | (lit, ...)
//! ```
//! Comments run from `--` to the end of the line.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod syntax;

pub use ast::{Declaration, Expression, Param, Program, Target};
pub use parser::{is_variable_name, parse, parse_expr, undeclared_calls};
pub use pretty::{pretty, pretty_expr};
pub use syntax::{free_vars, if_then_else, substitute, substitute_all, substitute_param};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate declaration `{name}` at {line}:{col}")]
    DuplicateDeclaration { name: String, line: usize, col: usize },
}
