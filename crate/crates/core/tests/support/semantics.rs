//! Randomized laws of the expression semantics, each checked against an
//! oracle written independently of the engine.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;
use orc_core::lang::{
    free_vars, parse_expr, pretty_expr, substitute, substitute_all, Expression, Param, Program, Target,
};
use orc_core::semantics::{Action, Directory, Event, ExprObject, LocalConfig, Msg, Term};
use orc_core::time::{TimeInf, Timed};
use orc_core::{Const, EOid, Handle, Loc, SiteId, Time};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Law = fn(u32) -> Result<(), String>;

pub fn laws() -> Vec<(&'static str, Law)> {
    vec![
        ("parser roundtrip", parser_roundtrip as Law),
        ("substitution and free variables", substitution_laws),
        ("sequential fan-out", seq_fanout),
        ("pruning kills its right side", where_kill),
        ("strict site calls", strictness),
        ("fresh handles", handle_uniqueness),
    ]
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&s, f).map_err(|e| e.to_string())
}

const VARS: [&str; 4] = ["x", "y", "z", "w"];
const DECLS: [&str; 2] = ["F", "G"];

fn lit() -> impl Strategy<Value = Const> {
    prop_oneof![
        Just(Const::Signal),
        any::<bool>().prop_map(Const::Bool),
        (-50i64..50).prop_map(Const::Int),
        (-20i64..20, 2i64..7).prop_map(|(n, d)| Const::number(Rational64::new(n, d))),
        "[a-z \"\\\\\n]{0,4}".prop_map(Const::Str),
        prop::collection::vec((0i64..9).prop_map(Const::Int), 2..4).prop_map(Const::Tuple),
    ]
}

fn param() -> impl Strategy<Value = Param> {
    prop_oneof![
        lit().prop_map(Param::Lit),
        prop::sample::select(&VARS[..]).prop_map(|v| Param::Var(v.into())),
        prop::sample::select(&["M", "N"][..]).prop_map(|s| Param::Site(s.into())),
        (prop::sample::select(&VARS[..]), 0usize..3).prop_map(|(v, i)| Param::Proj(v.into(), i)),
    ]
}

#[derive(Clone, Debug)]
enum Head {
    Site(&'static str),
    /// Call through the `k`-th variable in scope, if any.
    Var(usize),
    Decl(&'static str),
}

/// Syntax trees the parser can produce: variable call targets only where
/// the variable is in scope.
pub fn expression() -> impl Strategy<Value = Expression> {
    #[derive(Clone, Debug)]
    enum Shape {
        Silent,
        Call(Head, Vec<Param>),
        Par(Box<Shape>, Box<Shape>),
        Seq(Box<Shape>, &'static str, Box<Shape>),
        Where(Box<Shape>, &'static str, Box<Shape>),
    }
    let head = prop_oneof![
        prop::sample::select(&["M", "N", "let", "rtimer"][..]).prop_map(Head::Site),
        (0usize..4).prop_map(Head::Var),
        prop::sample::select(&DECLS[..]).prop_map(Head::Decl),
    ];
    let leaf = prop_oneof![
        1 => Just(Shape::Silent),
        4 => (head, prop::collection::vec(param(), 0..3)).prop_map(|(h, p)| Shape::Call(h, p)),
    ];
    let shape = leaf.prop_recursive(4, 24, 2, |inner| {
        let var = prop::sample::select(&VARS[..]);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Shape::Par(Box::new(l), Box::new(r))),
            (inner.clone(), var.clone(), inner.clone()).prop_map(|(l, x, r)| Shape::Seq(Box::new(l), x, Box::new(r))),
            (inner.clone(), var, inner).prop_map(|(l, x, r)| Shape::Where(Box::new(l), x, Box::new(r))),
        ]
    });
    fn build(s: Shape, scope: &mut Vec<&'static str>) -> Expression {
        match s {
            Shape::Silent => Expression::Silent,
            Shape::Call(Head::Site(n), params) => Expression::site(n, params),
            Shape::Call(Head::Decl(n), params) => Expression::call(n, params),
            Shape::Call(Head::Var(k), params) => match scope.get(k) {
                Some(x) => Expression::SiteCall { target: Target::Var(x.to_string()), params },
                None => Expression::site("M", params),
            },
            Shape::Par(l, r) => Expression::par(build(*l, scope), build(*r, scope)),
            Shape::Seq(l, x, r) => {
                let l = build(*l, scope);
                scope.push(x);
                let r = build(*r, scope);
                scope.pop();
                Expression::seq(l, x, r)
            }
            Shape::Where(l, x, r) => {
                scope.push(x);
                let l = build(*l, scope);
                scope.pop();
                Expression::where_(l, x, build(*r, scope))
            }
        }
    }
    shape.prop_map(|s| build(s, &mut Vec::new()))
}

fn parser_roundtrip(cases: u32) -> Result<(), String> {
    check(cases, expression(), |e| {
        let text = pretty_expr(&e);
        let back = parse_expr(&text, &DECLS).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
        Ok(())
    })
}

/// Whether `x` occurs free where substituting a non-site constant can
/// silence a whole call: in call position or under a projection.
fn may_silence(e: &Expression, x: &str) -> bool {
    match e {
        Expression::Silent => false,
        Expression::SiteCall { target, params } => {
            matches!(target, Target::Var(v) if v == x)
                || params.iter().any(|p| matches!(p, Param::Proj(v, _) if v == x))
        }
        Expression::ExprCall { params, .. } => params.iter().any(|p| matches!(p, Param::Proj(v, _) if v == x)),
        Expression::Par(l, r) => may_silence(l, x) || may_silence(r, x),
        Expression::Seq(l, v, r) => may_silence(l, x) || (v != x && may_silence(r, x)),
        Expression::Where(l, v, r) => (v != x && may_silence(l, x)) || may_silence(r, x),
    }
}

fn substitution_laws(cases: u32) -> Result<(), String> {
    let s = (expression(), prop::sample::select(&VARS[..]), prop::sample::select(&VARS[..]), lit(), lit());
    check(cases, s, |(e, x, y, c, d)| {
        let fv = free_vars(&e);
        let ex = substitute(&e, x, &c);
        let mut expect = fv.clone();
        expect.remove(x);
        let got = free_vars(&ex);
        prop_assert!(got.is_subset(&expect));
        if !may_silence(&e, x) {
            prop_assert_eq!(&got, &expect);
        }
        if !fv.contains(x) {
            prop_assert_eq!(&ex, &e);
        }
        if x != y {
            let xy = substitute(&ex, y, &d);
            prop_assert_eq!(&xy, &substitute(&substitute(&e, y, &d), x, &c));
            prop_assert_eq!(&xy, &substitute_all(&e, &[(x, &c), (y, &d)]));
        }
        // the runtime's in-place substitution on terms agrees
        let mut t = Term::from_expr(&e);
        t.subst(x, &c);
        prop_assert_eq!(t, Term::from_expr(&ex));
        Ok(())
    })
}

/// Expressions built from `let`, `rtimer`, parallel and sequential
/// composition over the variables `x` and `y`.
fn timed_expression() -> impl Strategy<Value = Expression> {
    let var = prop::sample::select(&["x", "y"][..]);
    let leaf = prop_oneof![
        1 => Just(Expression::Silent),
        3 => (0i64..4).prop_map(|c| Expression::site("let", vec![Param::Lit(Const::Int(c))])),
        2 => var.clone().prop_map(|v| Expression::site("let", vec![Param::Var(v.into())])),
        2 => (0i64..3).prop_map(|k| Expression::site("rtimer", vec![Param::Lit(Const::Int(k))])),
    ];
    leaf.prop_recursive(4, 20, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expression::par(l, r)),
            (inner.clone(), var.clone(), inner).prop_map(|(l, x, r)| Expression::seq(l, x, r)),
        ]
    })
}

type Pubs = Vec<(Rational64, Const)>;

/// Publications of a `let`/`rtimer` expression, computed directly from the
/// combinator definitions with an explicit environment.
fn denote(e: &Expression, env: &BTreeMap<String, Const>, t0: Rational64, out: &mut Pubs) {
    denote_counting(e, env, t0, out, &mut 0);
}

/// [`denote`], also counting the right-hand instances every `>x>` spawns.
fn denote_counting(e: &Expression, env: &BTreeMap<String, Const>, t0: Rational64, out: &mut Pubs, spawns: &mut usize) {
    match e {
        Expression::Silent => {}
        Expression::SiteCall { target: Target::Site(n), params } => {
            let args: Option<Vec<Const>> = params
                .iter()
                .map(|p| match p {
                    Param::Lit(c) => Some(c.clone()),
                    Param::Var(v) => env.get(v).cloned(),
                    _ => None,
                })
                .collect();
            let Some(args) = args else { return };
            match (n.as_str(), args.as_slice()) {
                ("let", [c]) => out.push((t0, c.clone())),
                ("rtimer", [Const::Int(k)]) => out.push((t0 + k, Const::Signal)),
                _ => {}
            }
        }
        Expression::Par(l, r) => {
            denote_counting(l, env, t0, out, spawns);
            denote_counting(r, env, t0, out, spawns);
        }
        Expression::Seq(l, x, r) => {
            let mut left = Vec::new();
            denote_counting(l, env, t0, &mut left, spawns);
            *spawns += left.len();
            for (t, v) in left {
                let mut inner = env.clone();
                inner.insert(x.clone(), v);
                denote_counting(r, &inner, t, out, spawns);
            }
        }
        other => panic!("outside the timed fragment: {other}"),
    }
}

fn loc() -> Loc {
    Loc::new("localhost", 9000)
}

fn config(goal: Expression) -> LocalConfig {
    let dir: Directory = [("M".to_string(), SiteId::External(Loc::new("remote", 1), 0))].into_iter().collect();
    let mut cfg = LocalConfig::new(Arc::new(dir));
    let p = Program { decls: Vec::new(), goal };
    cfg.exprs.push(ExprObject::from_program(EOid::new(loc(), 0), &p));
    cfg
}

/// Runs to quiescence, recording events with their time.
fn quiesce(cfg: &mut LocalConfig, evs: &mut Vec<(Rational64, Event)>) -> Result<(), TestCaseError> {
    let now = cfg.now();
    cfg.run_to_quiescence_with(100_000, |e| evs.push((now, e.clone())))
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    Ok(())
}

/// Lets time pass to the next event; false when nothing is pending.
fn advance(cfg: &mut LocalConfig) -> bool {
    match cfg.mte() {
        TimeInf::Finite(r) if !r.is_zero() => {
            cfg.delta(&r);
            true
        }
        _ => false,
    }
}

fn run_all(cfg: &mut LocalConfig) -> Result<Vec<(Rational64, Event)>, TestCaseError> {
    let mut evs = Vec::new();
    loop {
        quiesce(cfg, &mut evs)?;
        if !advance(cfg) {
            return Ok(evs);
        }
    }
}

fn published(evs: &[(Rational64, Event)]) -> Pubs {
    let mut v: Pubs = evs
        .iter()
        .filter_map(|(t, e)| match e {
            Event::Expr { action: Action::Publish(c), .. } => Some((*t, c.clone())),
            _ => None,
        })
        .collect();
    v.sort();
    v
}

fn seq_fanout(cases: u32) -> Result<(), String> {
    check(cases, (timed_expression(), timed_expression()), |(f, g)| {
        let e = Expression::seq(f.clone(), "x", g.clone());
        let (mut expect, mut spawns) = (Vec::new(), 0);
        denote_counting(&e, &BTreeMap::new(), Rational64::zero(), &mut expect, &mut spawns);
        expect.sort();
        let mut cfg = config(e);
        let evs = run_all(&mut cfg)?;
        prop_assert_eq!(published(&evs), expect);
        // one right-hand instance per publication on a left side
        let seen = evs.iter().filter(|(_, e)| matches!(e, Event::Expr { action: Action::SeqSpawn(_), .. })).count();
        prop_assert_eq!(seen, spawns);
        prop_assert!(!cfg.has_redex());
        Ok(())
    })
}

fn where_kill(cases: u32) -> Result<(), String> {
    check(cases, timed_expression(), |g| {
        let w = || Expression::site("let", vec![Param::Var("w".into())]);
        let e = Expression::where_(Expression::par(w(), w()), "w", g.clone());
        let mut right = Vec::new();
        denote(&g, &BTreeMap::new(), Rational64::zero(), &mut right);
        right.sort();
        let mut cfg = config(e);
        let mut evs = Vec::new();
        let mut bound_at = None;
        loop {
            quiesce(&mut cfg, &mut evs)?;
            let binds =
                evs.iter().filter(|(_, e)| matches!(e, Event::Expr { action: Action::WhereBind(_), .. })).count();
            prop_assert!(binds <= 1);
            if binds == 1 && bound_at.is_none() {
                bound_at = Some(cfg.now());
                // the right side is gone together with its timers
                prop_assert!(cfg.timers.is_empty(), "{:?}", cfg.timers);
                prop_assert!(!cfg.has_redex());
            }
            if !advance(&mut cfg) {
                break;
            }
        }
        let pubs = published(&evs);
        match right.first() {
            // the left side waits on `w` forever
            None => prop_assert!(pubs.is_empty() && bound_at.is_none()),
            Some((t, _)) => {
                prop_assert_eq!(bound_at, Some(*t));
                prop_assert_eq!(pubs.len(), 2);
                prop_assert_eq!(&pubs[0], &pubs[1]);
                prop_assert_eq!(pubs[0].0, *t);
                prop_assert!(right.iter().any(|p| *p == pubs[0]));
                prop_assert!(cfg.exprs[0].exp.is_stop());
            }
        }
        Ok(())
    })
}

fn strictness(cases: u32) -> Result<(), String> {
    let p = prop_oneof![
        (0i64..5).prop_map(|c| Param::Lit(Const::Int(c))),
        Just(Param::Var("x".into())),
        Just(Param::Var("y".into())),
    ];
    let s = (prop::collection::vec(p, 0..4), prop::option::of((0i64..3, 0i64..9)));
    check(cases, s, |(params, publish)| {
        let right = match publish {
            Some((k, c)) => Expression::seq(
                Expression::site("rtimer", vec![Param::Lit(Const::Int(k))]),
                "_",
                Expression::site("let", vec![Param::Lit(Const::Int(c))]),
            ),
            None => Expression::Silent,
        };
        let uses = |v: &str| params.iter().any(|p| matches!(p, Param::Var(x) if x == v));
        let mut cfg = config(Expression::where_(Expression::site("M", params.clone()), "x", right));
        let mut evs = Vec::new();
        loop {
            quiesce(&mut cfg, &mut evs)?;
            // calls to `M` are never answered here
            cfg.msgs.clear();
            if !advance(&mut cfg) {
                break;
            }
        }
        let fired: Vec<(Rational64, Vec<Const>)> = evs
            .iter()
            .filter_map(|(t, e)| match e {
                Event::Expr { action: Action::SiteCall { args, .. }, .. } => Some((*t, args.clone())),
                _ => None,
            })
            .collect();
        // a call fires once every parameter is a constant, and only then
        let expect = match publish {
            _ if uses("y") => vec![],
            _ if !uses("x") => vec![(Rational64::zero(), params.iter().filter_map(Param::to_const).collect())],
            None => vec![],
            Some((k, c)) => {
                let args = params.iter().map(|p| p.to_const().unwrap_or(Const::Int(c))).collect();
                vec![(Rational64::from_integer(k), args)]
            }
        };
        prop_assert_eq!(fired, expect);
        Ok(())
    })
}

/// Expressions calling the external site `M` under fan-out and pruning.
fn calling_expression() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        (0i64..3).prop_map(|c| Expression::site("M", vec![Param::Lit(Const::Int(c))])),
        Just(Expression::site("M", vec![Param::Var("x".into())])),
        (0i64..3).prop_map(|c| Expression::site("let", vec![Param::Lit(Const::Int(c))])),
        (0i64..2).prop_map(|k| Expression::site("rtimer", vec![Param::Lit(Const::Int(k))])),
    ];
    leaf.prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expression::par(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expression::seq(l, "x", r)),
            (inner.clone(), inner).prop_map(|(l, r)| Expression::where_(l, "x", r)),
        ]
    })
}

fn handle_uniqueness(cases: u32) -> Result<(), String> {
    check(cases, (calling_expression(), any::<u64>()), |(e, seed)| {
        let mut cfg = config(e);
        let mut evs = Vec::new();
        let mut timer_handles: BTreeSet<Handle> = BTreeSet::new();
        let mut bits = seed;
        for _ in 0..12 {
            quiesce(&mut cfg, &mut evs)?;
            timer_handles.extend(cfg.timers.iter().map(|t| t.handle.clone()));
            // answer some of the outstanding calls, leave the others hanging
            let mut progressed = false;
            for m in std::mem::take(&mut cfg.msgs) {
                match m {
                    Msg::Call { caller, args, handle, .. } if bits & 1 == 1 => {
                        let value = args.first().cloned().unwrap_or(Const::Signal);
                        cfg.msgs.push(Msg::Return { target: caller, value, delay: Time::zero(), handle });
                        progressed = true;
                    }
                    m => cfg.msgs.push(m),
                }
                bits = bits.rotate_right(1);
            }
            if !progressed {
                let pending: Vec<Msg> = cfg.msgs.drain(..).collect();
                let moved = advance(&mut cfg);
                cfg.msgs = pending;
                if !moved {
                    break;
                }
            }
        }
        let call_handles: Vec<&Handle> = evs
            .iter()
            .filter_map(|(_, e)| match e {
                Event::Expr { action: Action::SiteCall { handle, .. }, .. } => Some(handle),
                _ => None,
            })
            .collect();
        let distinct: BTreeSet<&Handle> = call_handles.iter().copied().collect();
        prop_assert_eq!(distinct.len(), call_handles.len());
        prop_assert!(distinct.iter().all(|h| !timer_handles.contains(*h)));
        Ok(())
    })
}
