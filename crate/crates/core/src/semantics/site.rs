use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

use super::Ambient;
use crate::value::{Const, EOid, Handle, SiteId};

/// How a site answers one request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiteReply {
    Now(Const),
    /// Park the reply under a key until some later request releases it.
    Defer(Const),
    Silent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteOutcome {
    pub state: Const,
    pub reply: SiteReply,
    /// Parked replies to complete: `(key, value)`, oldest slot per key first.
    pub releases: Vec<(Const, Const)>,
    /// Human-readable trace lines.
    pub log: Vec<String>,
}

impl SiteOutcome {
    pub fn reply(state: Const, value: Const) -> Self {
        SiteOutcome { state, reply: SiteReply::Now(value), releases: Vec::new(), log: Vec::new() }
    }

    pub fn silent(state: Const) -> Self {
        SiteOutcome { state, reply: SiteReply::Silent, releases: Vec::new(), log: Vec::new() }
    }
}

/// A reactive site: a pure state transformer over `Const` states, so the
/// same code drives both the live runtime and the simulation model.
pub trait SiteBehavior: Send + Sync {
    fn name(&self) -> &str;
    fn handle(&self, state: &Const, args: &[Const], now: &Rational64) -> SiteOutcome;
}

impl fmt::Debug for dyn SiteBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<site {}>", self.name())
    }
}

/// Where a reply must go.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReplyTo {
    /// A caller in the same configuration.
    Local { caller: EOid, handle: Handle },
    /// An open connection, identified by its owner.
    Socket(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteObject {
    pub id: SiteId,
    pub name: String,
    pub state: Const,
    pub pending: Vec<(Const, ReplyTo)>,
    pub behavior: Ambient<Arc<dyn SiteBehavior>>,
}

impl SiteObject {
    pub fn new(id: SiteId, behavior: Arc<dyn SiteBehavior>, state: Const) -> Self {
        SiteObject { id, name: behavior.name().to_string(), state, pending: Vec::new(), behavior: Ambient(behavior) }
    }

    /// Runs the behavior on one request and returns the replies now due,
    /// including released parked ones, plus the trace lines.
    pub fn receive(&mut self, args: &[Const], from: ReplyTo, now: &Rational64) -> (Vec<(ReplyTo, Const)>, Vec<String>) {
        let out = self.behavior.handle(&self.state, args, now);
        self.state = out.state;
        let mut replies = Vec::new();
        match out.reply {
            SiteReply::Now(c) => replies.push((from, c)),
            SiteReply::Defer(key) => self.pending.push((key, from)),
            SiteReply::Silent => {}
        }
        for (key, value) in out.releases {
            if let Some(i) = self.pending.iter().position(|(k, _)| *k == key) {
                let (_, to) = self.pending.remove(i);
                replies.push((to, value));
            }
        }
        (replies, out.log)
    }
}
