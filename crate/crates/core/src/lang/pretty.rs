use super::ast::{Expression, Param, Program, Target};

// Binding levels, loosest first.
const WHERE: u8 = 0;
const PAR: u8 = 1;
const SEQ: u8 = 2;
const ATOM: u8 = 3;

fn level(e: &Expression) -> u8 {
    match e {
        Expression::Where(..) => WHERE,
        Expression::Par(..) => PAR,
        Expression::Seq(..) => SEQ,
        _ => ATOM,
    }
}

fn param(p: &Param, out: &mut String) {
    match p {
        Param::Var(x) | Param::Site(x) => out.push_str(x),
        Param::Lit(c) => out.push_str(&c.to_string()),
        Param::Proj(x, i) => {
            out.push_str(x);
            out.push('.');
            out.push_str(&i.to_string());
        }
    }
}

fn call(name: &str, params: &[Param], out: &mut String) {
    out.push_str(name);
    if !params.is_empty() {
        out.push('(');
        for (i, p) in params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            param(p, out);
        }
        out.push(')');
    }
}

fn expr(e: &Expression, min: u8, out: &mut String) {
    let paren = level(e) < min;
    if paren {
        out.push('(');
    }
    match e {
        Expression::Silent => out.push('0'),
        Expression::SiteCall { target: Target::Site(n) | Target::Var(n), params } => {
            call(n, params, out);
        }
        Expression::ExprCall { name, params } => {
            call(name, params, out);
            if params.is_empty() {
                out.push_str("()");
            }
        }
        Expression::Par(l, r) => {
            expr(l, PAR, out);
            out.push_str(" | ");
            expr(r, SEQ, out);
        }
        Expression::Seq(l, x, r) => {
            expr(l, ATOM, out);
            out.push_str(" > ");
            out.push_str(x);
            out.push_str(" > ");
            expr(r, SEQ, out);
        }
        Expression::Where(l, x, r) => {
            expr(l, WHERE, out);
            out.push_str(" < ");
            out.push_str(x);
            out.push_str(" < ");
            expr(r, PAR, out);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn pretty_expr(e: &Expression) -> String {
    let mut out = String::new();
    expr(e, WHERE, &mut out);
    out
}

/// Renders a program as text that parses back to the same AST.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        out.push_str(&d.name);
        out.push('(');
        out.push_str(&d.formals.join(", "));
        out.push_str(") := ");
        expr(&d.body, WHERE, &mut out);
        out.push_str(" ;\n");
    }
    expr(&p.goal, WHERE, &mut out);
    out
}
