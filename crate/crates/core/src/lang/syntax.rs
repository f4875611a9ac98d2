use std::borrow::Cow;
use std::collections::BTreeSet;

use crate::value::Const;

use super::ast::{Expression, Param, Target};

fn param_var(p: &Param) -> Option<&str> {
    match p {
        Param::Var(x) | Param::Proj(x, _) => Some(x),
        _ => None,
    }
}

fn collect(e: &Expression, out: &mut BTreeSet<String>) {
    match e {
        Expression::Silent => {}
        Expression::SiteCall { target, params } => {
            if let Target::Var(x) = target {
                out.insert(x.clone());
            }
            out.extend(params.iter().filter_map(param_var).map(str::to_string));
        }
        Expression::ExprCall { params, .. } => {
            out.extend(params.iter().filter_map(param_var).map(str::to_string));
        }
        Expression::Par(l, r) => {
            collect(l, out);
            collect(r, out);
        }
        Expression::Seq(l, x, r) => {
            collect(l, out);
            let mut inner = BTreeSet::new();
            collect(r, &mut inner);
            inner.remove(x);
            out.extend(inner);
        }
        Expression::Where(l, x, r) => {
            let mut inner = BTreeSet::new();
            collect(l, &mut inner);
            inner.remove(x);
            out.extend(inner);
            collect(r, out);
        }
    }
}

/// Free variables. `>x>` binds `x` on its right, `<x<` on its left.
pub fn free_vars(e: &Expression) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect(e, &mut out);
    out
}

/// Substitutes `c` for `v` in a parameter. `None` means the parameter can
/// never become well formed (projection out of range), which makes the
/// enclosing call silent.
pub fn substitute_param(p: &Param, v: &str, c: &Const) -> Option<Param> {
    match p {
        Param::Var(x) if x == v => Some(Param::from_const(c.clone())),
        Param::Proj(x, i) if x == v => c.project(*i).map(Param::from_const),
        other => Some(other.clone()),
    }
}

fn substitute_params(ps: &[Param], binds: &[(&str, &Const)]) -> Option<Vec<Param>> {
    ps.iter().map(|p| binds.iter().try_fold(p.clone(), |p, (v, c)| substitute_param(&p, v, c))).collect()
}

/// Replaces every free occurrence of `v` by the constant `c`.
///
/// A variable in call position must be bound to a site reference; binding it
/// to anything else, or projecting outside a tuple, turns that call into
/// `0`, since such a call can never be made.
pub fn substitute(e: &Expression, v: &str, c: &Const) -> Expression {
    substitute_all(e, &[(v, c)])
}

/// Simultaneous [`substitute`] for distinct variables, in one pass.
pub fn substitute_all(e: &Expression, binds: &[(&str, &Const)]) -> Expression {
    if binds.is_empty() {
        return e.clone();
    }
    match e {
        Expression::Silent => Expression::Silent,
        Expression::SiteCall { target, params } => {
            let target = match target {
                Target::Var(x) => match binds.iter().find(|(v, _)| v == x) {
                    Some((_, Const::SiteRef(s))) => Target::Site(s.clone()),
                    Some(_) => return Expression::Silent,
                    None => target.clone(),
                },
                t => t.clone(),
            };
            match substitute_params(params, binds) {
                Some(params) => Expression::SiteCall { target, params },
                None => Expression::Silent,
            }
        }
        Expression::ExprCall { name, params } => match substitute_params(params, binds) {
            Some(params) => Expression::ExprCall { name: name.clone(), params },
            None => Expression::Silent,
        },
        Expression::Par(l, r) => Expression::par(substitute_all(l, binds), substitute_all(r, binds)),
        Expression::Seq(l, x, r) => {
            let r = substitute_all(r, &without(binds, x));
            Expression::Seq(Box::new(substitute_all(l, binds)), x.clone(), Box::new(r))
        }
        Expression::Where(l, x, r) => {
            let l = substitute_all(l, &without(binds, x));
            Expression::Where(Box::new(l), x.clone(), Box::new(substitute_all(r, binds)))
        }
    }
}

fn without<'a, 'b>(binds: &'b [(&'a str, &'a Const)], x: &str) -> Cow<'b, [(&'a str, &'a Const)]> {
    if binds.iter().any(|(v, _)| *v == x) {
        Cow::Owned(binds.iter().copied().filter(|(v, _)| *v != x).collect())
    } else {
        Cow::Borrowed(binds)
    }
}

/// `if b then f else g`, expanded to `if(b) >> f | not(b) > nb > if(nb) >> g`.
pub fn if_then_else(cond: Param, then: Expression, otherwise: Expression) -> Expression {
    let fresh = |e: &Expression, base: &str| {
        let fv = free_vars(e);
        let mut name = base.to_string();
        let mut k = 0;
        while fv.contains(&name) {
            k += 1;
            name = format!("{base}{k}");
        }
        name
    };
    let t_bind = fresh(&then, "_then");
    let e_bind = fresh(&otherwise, "_else");
    let neg = "_nb";
    let then_branch = Expression::seq(Expression::site("if", vec![cond.clone()]), &t_bind, then);
    let else_branch = Expression::seq(
        Expression::site("not", vec![cond]),
        neg,
        Expression::seq(Expression::site("if", vec![Param::Var(neg.to_string())]), &e_bind, otherwise),
    );
    Expression::par(then_branch, else_branch)
}
