//! Randomized laws of time elapse over configurations, processes and whole
//! systems, with exact rational equality.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;
use orc_core::semantics::{LocalConfig, Msg, Timer};
use orc_core::sim::{GlobalSystem, Owner, Process, SimModel, SocketMsg};
use orc_core::time::{Clock, Timed};
use orc_core::{Const, EOid, Handle, Loc, SiteId, Time, TimeInf};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Law = fn(u32) -> Result<(), String>;

pub fn laws() -> Vec<(&'static str, Law)> {
    vec![
        ("monus truncation", monus_truncation as Law),
        ("delta additivity", delta_additivity),
        ("mte and delta", mte_delta),
    ]
}

fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&s, f).map_err(|e| e.to_string())
}

fn rat() -> impl Strategy<Value = Rational64> {
    (0i64..40, 1i64..7).prop_map(|(n, d)| Rational64::new(n, d))
}

fn time() -> impl Strategy<Value = Time> {
    prop_oneof![4 => rat().prop_map(Time::Finite), 1 => Just(Time::Infinity)]
}

fn eo() -> EOid {
    EOid::new(Loc::new("localhost", 9000), 0)
}

fn handle(id: u64) -> Handle {
    Handle { owner: eo(), id }
}

fn config() -> impl Strategy<Value = LocalConfig> {
    let msg = (any::<bool>(), time(), 0u64..50).prop_map(|(call, delay, h)| {
        if call {
            let target = SiteId::External(Loc::new("remote", 1), 0);
            Msg::Call { target, caller: eo(), args: vec![Const::Int(h as i64)], delay, handle: handle(h) }
        } else {
            Msg::Return { target: eo(), value: Const::Int(h as i64), delay, handle: handle(h) }
        }
    });
    let timer =
        (time(), 0u64..50).prop_map(|(remaining, h)| Timer { handle: handle(h), remaining, value: Const::Signal });
    (prop::collection::vec(msg, 0..5), prop::collection::vec(timer, 0..4), rat()).prop_map(|(msgs, timers, now)| {
        let mut c = LocalConfig::default();
        c.msgs = msgs;
        c.timers = timers;
        c.clock = Clock::new(now);
        c
    })
}

fn process() -> impl Strategy<Value = Process> {
    let io = (time(), 0u64..9, any::<bool>()).prop_map(|(remaining, sock, received)| {
        let owner = Owner::Proxy(handle(sock));
        if received {
            SocketMsg::Received { owner, sock, payload: Const::Signal, remaining }
        } else {
            SocketMsg::Receive { sock, owner }
        }
    });
    (config(), prop::collection::vec(io, 0..4)).prop_map(|(sys, io)| {
        let mut p = Process::expr_node("p", Loc::new("localhost", 9000), sys);
        p.io = io;
        p
    })
}

fn system() -> impl Strategy<Value = GlobalSystem> {
    (prop::collection::vec(process(), 1..4), rat())
        .prop_map(|(procs, elapsed)| GlobalSystem { elapsed, ..GlobalSystem::new(procs, vec![Time::zero()]) })
}

/// Every pending delay of a process, read off its fields.
fn pending(p: &Process) -> Vec<Time> {
    let mut v: Vec<Time> = p.sys.msgs.iter().map(|m| m.delay().clone()).collect();
    v.extend(p.sys.timers.iter().map(|t| t.remaining.clone()));
    v.extend(p.io.iter().filter_map(|m| match m {
        SocketMsg::Received { remaining, .. } => Some(remaining.clone()),
        _ => None,
    }));
    v
}

/// Truncated subtraction on plain rationals.
fn monus_oracle(d: &Time, r: &Rational64) -> Time {
    match d {
        TimeInf::Infinity => TimeInf::Infinity,
        TimeInf::Finite(a) => TimeInf::Finite(if a > r { a - r } else { Rational64::zero() }),
    }
}

fn min_oracle(v: &[Time]) -> Time {
    v.iter().filter_map(|t| t.as_finite().copied()).min().map_or(TimeInf::Infinity, TimeInf::Finite)
}

fn monus_truncation(cases: u32) -> Result<(), String> {
    check(cases, (time(), rat(), rat(), -1000i64..1000, 0i64..1000), |(d, r, s, a, b)| {
        let m = d.monus(&r);
        prop_assert_eq!(&m, &monus_oracle(&d, &r));
        prop_assert!(m.le_time(&d));
        prop_assert_eq!(m.monus(&s), d.monus(&(r + s)));
        if let TimeInf::Finite(x) = &d {
            prop_assert_eq!(m.plus(&Time::Finite(r)) == d, r <= *x);
        }
        // the same algebra over integers
        if let Some(t) = TimeInf::finite(a) {
            let want = TimeInf::Finite((a - b).max(0));
            prop_assert_eq!(t.monus(&b), want);
        } else {
            prop_assert!(a < 0);
        }
        Ok(())
    })
}

fn delta_additivity(cases: u32) -> Result<(), String> {
    check(cases, (system(), rat(), rat()), |(s, r1, r2)| {
        let model = SimModel::default();
        let mut two = s.clone();
        model.delta(&mut two, &r1);
        model.delta(&mut two, &r2);
        let mut one = s.clone();
        model.delta(&mut one, &(r1 + r2));
        prop_assert_eq!(&two, &one);
        prop_assert_eq!(one.elapsed, s.elapsed + r1 + r2);
        for (before, after) in s.procs.iter().zip(&one.procs) {
            prop_assert_eq!(after.sys.clock.now, before.sys.clock.now + r1 + r2);
            let want: Vec<Time> = pending(before).iter().map(|d| monus_oracle(d, &(r1 + r2))).collect();
            prop_assert_eq!(pending(after), want);
            // and on the bare configuration
            let mut c = before.sys.clone();
            c.delta(&r1);
            c.delta(&r2);
            prop_assert_eq!(&c, &after.sys);
        }
        Ok(())
    })
}

fn mte_delta(cases: u32) -> Result<(), String> {
    check(cases, (system(), rat()), |(s, r)| {
        let model = SimModel::default();
        let all: Vec<Time> = s.procs.iter().flat_map(|p| pending(p)).collect();
        let mte = model.mte(&s);
        prop_assert_eq!(&mte, &min_oracle(&all));
        for p in &s.procs {
            prop_assert_eq!(p.mte(), min_oracle(&pending(p)));
            prop_assert_eq!(p.sys.mte(), {
                let mut local = pending(p);
                local.truncate(p.sys.msgs.len() + p.sys.timers.len());
                min_oracle(&local)
            });
        }
        let mut next = s.clone();
        model.delta(&mut next, &r);
        let after = model.mte(&next);
        match &mte {
            // elapsing up to mte lowers it by exactly that much
            TimeInf::Finite(m) if r <= *m => prop_assert_eq!(after, TimeInf::Finite(m - r)),
            // elapsing past it truncates the earliest event to zero
            TimeInf::Finite(_) => prop_assert!(after.is_zero()),
            TimeInf::Infinity => prop_assert_eq!(after, TimeInf::Infinity),
        }
        // elapsing exactly mte makes some event due
        if let TimeInf::Finite(m) = &mte {
            let mut due = s.clone();
            model.delta(&mut due, m);
            prop_assert!(model.mte(&due).is_zero());
        }
        prop_assert!(Arc::ptr_eq(&s.delays, &next.delays));
        Ok(())
    })
}
