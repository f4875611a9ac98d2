//! Runtime expressions and the leftmost-innermost small-step relation.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Rational64;

use super::internal::{eval_internal_site, is_internal, Response};
use super::SemError;
use crate::lang::{self, Declaration, Expression, Param, Target};
use crate::value::{Const, EOid, Handle, SiteId};

pub type Env = BTreeMap<String, Declaration>;
pub type Directory = BTreeMap<String, SiteId>;

/// Callee of a runtime call.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Site(String),
    /// Blocks until substituted by a site reference.
    Var(String),
    Expr(String),
}

/// An [`Expression`] extended with the states evaluation passes through.
///
/// The right side of a `Seq` is kept as an untouched template: every value
/// its left side publishes spawns a fresh instance of it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Stop,
    Call(Head, Vec<Param>),
    /// Waiting for the return of the call with this handle id.
    Pending(u64),
    /// About to publish.
    Value(Const),
    Par(Box<Term>, Box<Term>),
    Seq(Box<Term>, String, Arc<Template>),
    Where(Box<Term>, String, Box<Term>),
}

/// An immutable expression with its digest computed once, so hashing a
/// term never walks its templates.
#[derive(Debug, PartialEq, Eq)]
pub struct Template {
    digest: u64,
    expr: Expression,
}

impl Template {
    pub fn new(expr: Expression) -> Arc<Template> {
        let mut h = DefaultHasher::new();
        expr.hash(&mut h);
        Arc::new(Template { digest: h.finish(), expr })
    }

    pub fn expr(&self) -> &Expression {
        &self.expr
    }
}

impl Hash for Template {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.digest);
    }
}

/// What a single step did, for tracing and instrumentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// An external site call was issued.
    SiteCall {
        site: SiteId,
        handle: Handle,
        args: Vec<Const>,
    },
    InternalCall {
        site: String,
    },
    ExprCall {
        name: String,
    },
    /// A call that can never be made (unknown site or declaration, arity mismatch).
    DeadCall {
        name: String,
    },
    /// The whole expression published.
    Publish(Const),
    /// The left side of a `Seq` published and a right instance was spawned.
    SeqSpawn(Const),
    /// The right side of a `Where` published; the branch is terminated.
    WhereBind(Const),
}

/// Everything a step may need from, or hand back to, its configuration.
pub struct StepCx<'a> {
    pub owner: &'a EOid,
    pub env: &'a Env,
    pub directory: &'a Directory,
    pub now: Rational64,
    pub next_handle: &'a mut u64,
    /// `(handle, delay, value)` registered by `rtimer`.
    pub timers: Vec<(Handle, Rational64, Const)>,
    /// Handle ids that died with a terminated `Where` branch.
    pub killed: Vec<u64>,
    pub action: Option<Action>,
}

impl StepCx<'_> {
    fn fresh(&mut self) -> Handle {
        let id = *self.next_handle;
        *self.next_handle += 1;
        Handle { owner: self.owner.clone(), id }
    }
}

pub type Path = Vec<bool>;

impl Term {
    pub fn from_expr(e: &Expression) -> Term {
        Term::from_owned(e.clone())
    }

    pub fn from_owned(e: Expression) -> Term {
        let t = match e {
            Expression::Silent => Term::Stop,
            Expression::SiteCall { target: Target::Site(n), params } => Term::Call(Head::Site(n), params),
            Expression::SiteCall { target: Target::Var(x), params } => Term::Call(Head::Var(x), params),
            Expression::ExprCall { name, params } => Term::Call(Head::Expr(name), params),
            Expression::Par(l, r) => Term::Par(Box::new(Term::from_owned(*l)), Box::new(Term::from_owned(*r))),
            Expression::Seq(l, x, r) => Term::Seq(Box::new(Term::from_owned(*l)), x, Template::new(*r)),
            Expression::Where(l, x, r) => {
                Term::Where(Box::new(Term::from_owned(*l)), x, Box::new(Term::from_owned(*r)))
            }
        };
        t.pruned()
    }

    pub fn is_stop(&self) -> bool {
        matches!(self, Term::Stop)
    }

    /// The dead-branch equations, applied at the root only.
    fn pruned(self) -> Term {
        match self {
            Term::Par(l, r) if l.is_stop() => *r,
            Term::Par(l, r) if r.is_stop() => *l,
            Term::Seq(l, ..) if l.is_stop() => Term::Stop,
            Term::Where(l, _, r) if l.is_stop() && r.is_stop() => Term::Stop,
            t => t,
        }
    }

    fn prune_in_place(&mut self) {
        let t = std::mem::replace(self, Term::Stop);
        *self = t.pruned();
    }

    fn is_redex(&self) -> bool {
        match self {
            Term::Value(_) => true,
            Term::Call(Head::Var(_), _) => false,
            Term::Call(_, ps) => ps.iter().all(Param::is_ground),
            _ => false,
        }
    }

    /// Positions of all enabled steps, leftmost-innermost first.
    pub fn redexes(&self) -> Vec<Path> {
        let mut out = Vec::new();
        self.collect_redexes(&mut Vec::new(), &mut out, false);
        out
    }

    /// The first enabled step in scan order.
    pub fn first_redex(&self) -> Option<Path> {
        let mut out = Vec::new();
        self.collect_redexes(&mut Vec::new(), &mut out, true);
        out.pop()
    }

    pub fn has_redex(&self) -> bool {
        match self {
            Term::Par(l, r) | Term::Where(l, _, r) => l.has_redex() || r.has_redex(),
            Term::Seq(l, ..) => l.has_redex(),
            t => t.is_redex(),
        }
    }

    fn collect_redexes(&self, path: &mut Path, out: &mut Vec<Path>, first: bool) {
        if first && !out.is_empty() {
            return;
        }
        match self {
            Term::Par(l, r) | Term::Where(l, _, r) => {
                path.push(false);
                l.collect_redexes(path, out, first);
                path.pop();
                path.push(true);
                r.collect_redexes(path, out, first);
                path.pop();
            }
            Term::Seq(l, ..) => {
                path.push(false);
                l.collect_redexes(path, out, first);
                path.pop();
            }
            t if t.is_redex() => out.push(path.clone()),
            _ => {}
        }
    }

    /// Fires the redex at `path`. Returns the value that escapes to the
    /// root, if the step published one.
    pub fn step_at(&mut self, path: &[bool], cx: &mut StepCx<'_>) -> Result<Option<Const>, SemError> {
        let escaped = match (path.split_first(), &mut *self) {
            (None, Term::Value(_)) => match std::mem::replace(self, Term::Stop) {
                Term::Value(c) => Some(c),
                _ => unreachable!(),
            },
            (None, Term::Call(..)) => {
                self.fire(cx)?;
                None
            }
            (Some((&right, rest)), Term::Par(l, r)) => {
                let child = if right { r } else { l };
                child.step_at(rest, cx)?
            }
            (Some((false, rest)), Term::Seq(l, x, g)) => {
                if let Some(c) = l.step_at(rest, cx)? {
                    let spawn = Term::from_owned(lang::substitute(g.expr(), x, &c));
                    cx.action = Some(Action::SeqSpawn(c));
                    let seq = std::mem::replace(self, Term::Stop);
                    *self = Term::Par(Box::new(seq.pruned()), Box::new(spawn));
                }
                None
            }
            (Some((false, rest)), Term::Where(l, ..)) => l.step_at(rest, cx)?,
            (Some((true, rest)), Term::Where(_, _, r)) => {
                if let Some(c) = r.step_at(rest, cx)? {
                    let Term::Where(mut l, x, r) = std::mem::replace(self, Term::Stop) else { unreachable!() };
                    r.pending_ids(&mut cx.killed);
                    l.subst(&x, &c);
                    cx.action = Some(Action::WhereBind(c));
                    *self = *l;
                }
                None
            }
            (p, t) => {
                return Err(SemError::Malformed(format!("no redex at {p:?} in {t}")));
            }
        };
        self.prune_in_place();
        Ok(escaped)
    }

    fn fire(&mut self, cx: &mut StepCx<'_>) -> Result<(), SemError> {
        let Term::Call(head, params) = std::mem::replace(self, Term::Stop) else { unreachable!() };
        let args: Vec<Const> = params
            .iter()
            .map(|p| p.to_const().ok_or_else(|| SemError::Malformed(format!("non-ground parameter {p:?}"))))
            .collect::<Result<_, _>>()?;
        match head {
            Head::Expr(name) => match cx.env.get(&name) {
                Some(d) if d.formals.len() == args.len() => {
                    let binds: Vec<(&str, &Const)> = d.formals.iter().map(String::as_str).zip(&args).collect();
                    *self = Term::from_owned(lang::substitute_all(&d.body, &binds));
                    cx.action = Some(Action::ExprCall { name });
                }
                _ => {
                    log::warn!("call to undeclared or mis-applied expression `{name}`");
                    cx.action = Some(Action::DeadCall { name });
                }
            },
            Head::Site(name) if is_internal(&name) => {
                match eval_internal_site(&name, &args, &cx.now).map_err(|e| SemError::Malformed(e.to_string()))? {
                    Response::Immediate(c) => *self = Term::Value(c),
                    Response::After(t, c) => {
                        let h = cx.fresh();
                        *self = Term::Pending(h.id);
                        cx.timers.push((h, t, c));
                    }
                    Response::SilentForever => {}
                }
                cx.action = Some(Action::InternalCall { site: name });
            }
            Head::Site(name) => match cx.directory.get(&name) {
                Some(site) => {
                    let handle = cx.fresh();
                    *self = Term::Pending(handle.id);
                    cx.action = Some(Action::SiteCall { site: site.clone(), handle, args });
                }
                None => {
                    log::warn!("call to unbound site `{name}`");
                    cx.action = Some(Action::DeadCall { name });
                }
            },
            Head::Var(x) => return Err(SemError::Malformed(format!("call through unbound variable `{x}`"))),
        }
        Ok(())
    }

    /// Replaces free `v` by `c`, pruning calls that can never be made.
    pub fn subst(&mut self, v: &str, c: &Const) {
        match self {
            Term::Stop | Term::Pending(_) | Term::Value(_) => {}
            Term::Call(head, params) => {
                if let Head::Var(x) = head {
                    if x == v {
                        match c {
                            Const::SiteRef(s) => *head = Head::Site(s.clone()),
                            _ => {
                                *self = Term::Stop;
                                return;
                            }
                        }
                    }
                }
                for p in params.iter_mut() {
                    match lang::substitute_param(p, v, c) {
                        Some(q) => *p = q,
                        None => {
                            *self = Term::Stop;
                            return;
                        }
                    }
                }
            }
            Term::Par(l, r) => {
                l.subst(v, c);
                r.subst(v, c);
            }
            Term::Seq(l, x, g) => {
                l.subst(v, c);
                if x != v {
                    *g = Template::new(lang::substitute(g.expr(), v, c));
                }
            }
            Term::Where(l, x, r) => {
                if x != v {
                    l.subst(v, c);
                }
                r.subst(v, c);
            }
        }
        self.prune_in_place();
    }

    pub fn pending_ids(&self, out: &mut Vec<u64>) {
        match self {
            Term::Pending(h) => out.push(*h),
            Term::Par(l, r) | Term::Where(l, _, r) => {
                l.pending_ids(out);
                r.pending_ids(out);
            }
            Term::Seq(l, ..) => l.pending_ids(out),
            _ => {}
        }
    }

    /// Turns the pending leaf `h` into a publisher of `c`. False if no such
    /// leaf exists (its branch was terminated).
    pub fn resolve(&mut self, h: u64, c: &Const) -> bool {
        match self {
            Term::Pending(x) if *x == h => {
                *self = Term::Value(c.clone());
                true
            }
            Term::Par(l, r) | Term::Where(l, _, r) => l.resolve(h, c) || r.resolve(h, c),
            Term::Seq(l, ..) => l.resolve(h, c),
            _ => false,
        }
    }

    /// Number of nodes, counting `Seq` templates as one.
    pub fn size(&self) -> usize {
        match self {
            Term::Par(l, r) | Term::Where(l, _, r) => 1 + l.size() + r.size(),
            Term::Seq(l, ..) => 1 + l.size(),
            _ => 1,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Stop => f.write_str("0"),
            Term::Call(head, ps) => {
                let name = match head {
                    Head::Site(n) | Head::Var(n) | Head::Expr(n) => n,
                };
                write!(f, "{}", Expression::ExprCall { name: name.clone(), params: ps.clone() })
            }
            Term::Pending(h) => write!(f, "?{h}"),
            Term::Value(c) => write!(f, "!{c}"),
            Term::Par(l, r) => write!(f, "({l} | {r})"),
            Term::Seq(l, x, g) => write!(f, "({l} > {x} > {})", g.expr()),
            Term::Where(l, x, r) => write!(f, "({l} < {x} < {r})"),
        }
    }
}
