use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Rational64;

use super::site::{ReplyTo, SiteObject};
use super::term::{Action, Directory, Env, Path, StepCx, Term};
use super::{Ambient, SemError};
use crate::lang::{Expression, Program};
use crate::time::{Clock, TimeInf, Timed};
use crate::value::{Const, EOid, Handle, SiteId};
use crate::Time;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExprObject {
    pub id: EOid,
    pub env: Ambient<Arc<Env>>,
    pub exp: Term,
    pub next_handle: u64,
}

impl ExprObject {
    pub fn new(id: EOid, env: Arc<Env>, goal: &Expression) -> Self {
        ExprObject { id, env: Ambient(env), exp: Term::from_expr(goal), next_handle: 0 }
    }

    pub fn from_program(id: EOid, p: &Program) -> Self {
        ExprObject::new(id, Arc::new(env_of(p)), &p.goal)
    }
}

pub fn env_of(p: &Program) -> Env {
    p.decls.iter().map(|d| (d.name.clone(), d.clone())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Msg {
    /// Site call `target <- sc(caller, args, delay)`.
    Call { target: SiteId, caller: EOid, args: Vec<Const>, delay: Time, handle: Handle },
    /// Site return `target <- sr(value, delay)`.
    Return { target: EOid, value: Const, delay: Time, handle: Handle },
}

impl Msg {
    pub fn delay(&self) -> &Time {
        match self {
            Msg::Call { delay, .. } | Msg::Return { delay, .. } => delay,
        }
    }

    fn delay_mut(&mut self) -> &mut Time {
        match self {
            Msg::Call { delay, .. } | Msg::Return { delay, .. } => delay,
        }
    }
}

/// A pending `rtimer`: publishes `value` into the handle's leaf when
/// `remaining` reaches zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Timer {
    pub handle: Handle,
    pub remaining: Time,
    pub value: Const,
}

/// One enabled instantaneous transition of a [`LocalConfig`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LocalMove {
    /// Step the expression object at this index at this redex.
    Redex(usize, Path),
    /// Fire a due timer.
    Timer(usize),
    /// Deliver a zero-delay message to a co-located object.
    Deliver(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Expr {
        id: EOid,
        action: Action,
    },
    /// `live` is false when the timer's leaf had already been terminated.
    TimerFired {
        handle: Handle,
        live: bool,
    },
    Returned {
        handle: Handle,
        live: bool,
    },
    /// A local site handled a request. Replies bound for sockets are handed
    /// back to the caller of `apply`.
    SiteCalled {
        site: SiteId,
        socket_replies: Vec<(u64, Const)>,
        log: Vec<String>,
    },
}

/// A node's configuration: expression objects, site objects, one clock and
/// the messages and timers in flight between them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LocalConfig {
    pub clock: Clock,
    pub exprs: Vec<ExprObject>,
    pub sites: Vec<SiteObject>,
    pub msgs: Vec<Msg>,
    pub timers: Vec<Timer>,
    /// Site name to identifier. Shared and immutable.
    pub directory: Ambient<Arc<Directory>>,
}

impl LocalConfig {
    pub fn new(directory: Arc<Directory>) -> Self {
        LocalConfig { directory: Ambient(directory), ..Default::default() }
    }

    pub fn now(&self) -> Rational64 {
        self.clock.now
    }

    fn is_local_site(&self, id: &SiteId) -> bool {
        self.sites.iter().any(|s| s.id == *id)
    }

    fn deliverable(&self, m: &Msg) -> bool {
        m.delay().is_zero()
            && match m {
                Msg::Return { .. } => true,
                Msg::Call { target, .. } => self.is_local_site(target),
            }
    }

    /// Enabled moves by priority: expression steps first, then due timers,
    /// then zero-delay returns, then zero-delay calls to local sites. With
    /// `all` every move of the highest nonempty class is returned (the
    /// class order itself is fixed by the semantics);
    /// otherwise only the first one in scan order.
    pub fn moves(&self, all: bool) -> Vec<LocalMove> {
        let mut out = Vec::new();
        for (i, e) in self.exprs.iter().enumerate() {
            if all {
                out.extend(e.exp.redexes().into_iter().map(|p| LocalMove::Redex(i, p)));
            } else if let Some(p) = e.exp.first_redex() {
                return vec![LocalMove::Redex(i, p)];
            }
        }
        if !out.is_empty() {
            return out;
        }
        let due =
            self.timers.iter().enumerate().filter(|(_, t)| t.remaining.is_zero()).map(|(i, _)| LocalMove::Timer(i));
        let returns = self
            .msgs
            .iter()
            .enumerate()
            .filter(|(_, m)| matches!(m, Msg::Return { .. }) && self.deliverable(m))
            .map(|(i, _)| LocalMove::Deliver(i));
        let calls = self
            .msgs
            .iter()
            .enumerate()
            .filter(|(_, m)| matches!(m, Msg::Call { .. }) && self.deliverable(m))
            .map(|(i, _)| LocalMove::Deliver(i));
        let mut env_moves = due.chain(returns).chain(calls);
        if all {
            env_moves.collect()
        } else {
            env_moves.next().into_iter().collect()
        }
    }

    pub fn has_redex(&self) -> bool {
        self.exprs.iter().any(|e| e.exp.has_redex())
    }

    pub fn is_quiescent(&self) -> bool {
        self.moves(false).is_empty()
    }

    pub fn apply(&mut self, mv: &LocalMove) -> Result<Event, SemError> {
        match mv {
            LocalMove::Redex(i, path) => self.step_expr(*i, path),
            LocalMove::Timer(i) => {
                let t = self.timers.remove(*i);
                let live = self.deliver_return(&t.handle, &t.value);
                Ok(Event::TimerFired { handle: t.handle, live })
            }
            LocalMove::Deliver(i) => match self.msgs.remove(*i) {
                Msg::Return { value, handle, .. } => {
                    let live = self.deliver_return(&handle, &value);
                    Ok(Event::Returned { handle, live })
                }
                Msg::Call { target, caller, args, handle, .. } => {
                    let (socket_replies, log) = self.site_request(&target, &args, ReplyTo::Local { caller, handle });
                    Ok(Event::SiteCalled { site: target, socket_replies, log })
                }
            },
        }
    }

    fn step_expr(&mut self, i: usize, path: &[bool]) -> Result<Event, SemError> {
        let now = self.clock.now;
        let directory = Arc::clone(&self.directory);
        let e = &mut self.exprs[i];
        let env = Arc::clone(&e.env);
        let mut cx = StepCx {
            owner: &e.id,
            env: &env,
            directory: &directory,
            now,
            next_handle: &mut e.next_handle,
            timers: Vec::new(),
            killed: Vec::new(),
            action: None,
        };
        let escaped = e.exp.step_at(path, &mut cx)?;
        let StepCx { timers, killed, action, .. } = cx;
        let action = match (escaped, action) {
            (Some(c), _) => Action::Publish(c),
            (None, Some(a)) => a,
            (None, None) => return Err(SemError::Malformed("step without effect".into())),
        };
        let id = e.id.clone();
        if !killed.is_empty() {
            self.timers.retain(|t| !(t.handle.owner == id && killed.contains(&t.handle.id)));
        }
        for (handle, delay, value) in timers {
            self.timers.push(Timer { handle, remaining: TimeInf::Finite(delay), value });
        }
        if let Action::SiteCall { site, handle, args } = &action {
            self.msgs.push(Msg::Call {
                target: site.clone(),
                caller: id.clone(),
                args: args.clone(),
                delay: Time::zero(),
                handle: handle.clone(),
            });
        }
        Ok(Event::Expr { id, action })
    }

    /// One expression step in leftmost-innermost order, or `None` when no
    /// expression object can step.
    pub fn step_internal(&mut self) -> Result<Option<Event>, SemError> {
        match self.moves(false).into_iter().next() {
            Some(mv @ LocalMove::Redex(..)) => self.apply(&mv).map(Some),
            _ => Ok(None),
        }
    }

    /// Resolves the caller's pending leaf with `value`. False for a stale
    /// handle, whose value is dropped.
    pub fn deliver_return(&mut self, handle: &Handle, value: &Const) -> bool {
        let live =
            self.exprs.iter_mut().find(|e| e.id == handle.owner).is_some_and(|e| e.exp.resolve(handle.id, value));
        if !live {
            log::debug!("dropping stale return for {handle}");
        }
        live
    }

    /// Hands a request to a local site. Replies to local callers become
    /// zero-delay returns; replies to sockets are returned.
    pub fn site_request(&mut self, site: &SiteId, args: &[Const], from: ReplyTo) -> (Vec<(u64, Const)>, Vec<String>) {
        let now = self.clock.now;
        let Some(s) = self.sites.iter_mut().find(|s| s.id == *site) else {
            log::warn!("request for unknown site {site}");
            return (Vec::new(), Vec::new());
        };
        let (replies, log) = s.receive(args, from, &now);
        let mut out = Vec::new();
        for (to, value) in replies {
            match to {
                ReplyTo::Local { caller, handle } => {
                    self.msgs.push(Msg::Return { target: caller, value, delay: Time::zero(), handle })
                }
                ReplyTo::Socket(sock) => out.push((sock, value)),
            }
        }
        (out, log)
    }

    /// Removes and returns calls addressed to sites outside this configuration.
    pub fn take_outbound(&mut self) -> Vec<Msg> {
        let local: Vec<SiteId> = self.sites.iter().map(|s| s.id.clone()).collect();
        let (out, keep) = std::mem::take(&mut self.msgs)
            .into_iter()
            .partition(|m| matches!(m, Msg::Call { target, .. } if !local.contains(target)));
        self.msgs = keep;
        out
    }

    /// Applies the first enabled move until none is left, feeding each event
    /// to `observe`. Fails with a Zeno suspicion after `fuel` moves.
    pub fn run_to_quiescence_with(&mut self, fuel: usize, mut observe: impl FnMut(&Event)) -> Result<usize, SemError> {
        let mut steps = 0;
        let mut per_expr: BTreeMap<usize, usize> = BTreeMap::new();
        while let Some(mv) = self.moves(false).into_iter().next() {
            if steps == fuel {
                let busiest = per_expr.iter().max_by_key(|(_, n)| **n).map(|(i, _)| self.exprs[*i].id.to_string());
                return Err(SemError::Zeno { expr: busiest.unwrap_or_else(|| "<none>".into()), fuel });
            }
            if let LocalMove::Redex(i, _) = mv {
                *per_expr.entry(i).or_default() += 1;
            }
            let ev = self.apply(&mv)?;
            observe(&ev);
            steps += 1;
        }
        Ok(steps)
    }

    pub fn run_to_quiescence(&mut self, fuel: usize) -> Result<usize, SemError> {
        self.run_to_quiescence_with(fuel, |_| {})
    }

    /// Sorts every multiset so equal configurations compare equal.
    pub fn canonicalize(&mut self) {
        self.exprs.sort_by(|a, b| a.id.cmp(&b.id));
        self.sites.sort_by(|a, b| a.id.cmp(&b.id));
        self.msgs.sort();
        self.timers.sort();
    }
}

impl Timed for LocalConfig {
    fn delta(&mut self, r: &Rational64) {
        self.clock.advance(r);
        for m in &mut self.msgs {
            let d = m.delay().monus(r);
            *m.delay_mut() = d;
        }
        for t in &mut self.timers {
            t.remaining = t.remaining.monus(r);
        }
    }

    fn mte(&self) -> Time {
        self.msgs
            .iter()
            .map(Msg::delay)
            .chain(self.timers.iter().map(|t| &t.remaining))
            .cloned()
            .fold(TimeInf::Infinity, TimeInf::min_of)
    }
}
