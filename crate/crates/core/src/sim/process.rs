use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use num_rational::Rational64;

use crate::semantics::{Ambient, LocalConfig, Msg, ReplyTo, SemError, SiteObject};
use crate::time::{fmt_rat, TimeInf};
use crate::value::{Const, Handle, Loc, SiteId};
use crate::Time;

/// The object a socket message is addressed to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    /// The proxy `p(O, H)` of one outgoing call.
    Proxy(Handle),
    Site(SiteId),
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Proxy(h) => write!(f, "p({h})"),
            Owner::Site(s) => write!(f, "{s}"),
        }
    }
}

/// Requests to and replies from the socket manager.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SocketMsg {
    CreateServer {
        owner: Owner,
        port: u16,
    },
    CreatedServer {
        owner: Owner,
        server: u64,
    },
    AcceptClient {
        server: u64,
        owner: Owner,
    },
    AcceptedClient {
        owner: Owner,
        server: u64,
        sock: u64,
    },
    CreateClient {
        owner: Owner,
        address: String,
        port: u16,
    },
    CreatedSocket {
        owner: Owner,
        sock: u64,
    },
    /// Persists: a failed call never recovers.
    SocketError {
        owner: Owner,
    },
    Send {
        sock: u64,
        owner: Owner,
        payload: Const,
    },
    Sent {
        owner: Owner,
        sock: u64,
    },
    Receive {
        sock: u64,
        owner: Owner,
    },
    /// Delivered to `owner` once `remaining` reaches zero; never if infinite.
    Received {
        owner: Owner,
        sock: u64,
        payload: Const,
        remaining: Time,
    },
    CloseSocket {
        sock: u64,
        owner: Owner,
    },
    ClosedSocket {
        owner: Owner,
        sock: u64,
    },
}

impl SocketMsg {
    /// Whether the owning process can consume this message on its own.
    fn is_local(&self) -> bool {
        use SocketMsg::*;
        match self {
            CreatedServer { .. } | AcceptedClient { .. } | CreatedSocket { .. } | Sent { .. } | ClosedSocket { .. } => {
                true
            }
            Received { remaining, .. } => remaining.is_zero(),
            _ => false,
        }
    }
}

/// Client side of one outgoing site call.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proxy {
    pub handle: Handle,
    pub param: Const,
    pub response: Option<Const>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Process {
    pub pid: usize,
    pub name: String,
    pub loc: Loc,
    pub sys: LocalConfig,
    pub proxies: Vec<Proxy>,
    pub io: Vec<SocketMsg>,
    /// Some call of this process failed and has since been collected.
    pub failed: bool,
    /// Memoized [`Process::digest`]; cleared by every mutation through the model.
    pub(crate) digest: Ambient<OnceLock<u128>>,
}

impl Process {
    /// A node running expression objects.
    pub fn expr_node(name: &str, loc: Loc, sys: LocalConfig) -> Self {
        Process {
            pid: 0,
            name: name.to_string(),
            loc,
            sys,
            proxies: Vec::new(),
            io: Vec::new(),
            failed: false,
            digest: Ambient::default(),
        }
    }

    /// A node serving one site; it starts by asking for its server socket.
    pub fn site_node(name: &str, loc: Loc, site: SiteObject) -> Self {
        let port = loc.port;
        let owner = Owner::Site(site.id.clone());
        let mut sys = LocalConfig::default();
        sys.sites.push(site);
        let mut p = Process::expr_node(name, loc, sys);
        p.io.push(SocketMsg::CreateServer { owner, port });
        p
    }

    /// A 128-bit hash of the whole process, computed once per version.
    pub fn digest(&self) -> u128 {
        *self.digest.get_or_init(|| {
            let mut a = DefaultHasher::new();
            let mut b = DefaultHasher::new();
            0x9e37_79b9_u32.hash(&mut b);
            self.hash(&mut a);
            self.hash(&mut b);
            ((a.finish() as u128) << 64) | b.finish() as u128
        })
    }

    /// Forgets the memoized digest; call after mutating in place.
    pub fn touch(&mut self) {
        self.digest = Ambient::default();
    }

    pub fn site(&self, name: &str) -> Option<&SiteObject> {
        self.sys.sites.iter().find(|s| s.name == name)
    }

    /// Whether some process-local step is enabled. With `interleave`,
    /// expression-level moves are left to the caller.
    pub fn local_enabled(&self, interleave: bool) -> bool {
        (!interleave && !self.sys.is_quiescent())
            || self.sys.msgs.iter().any(|m| self.is_outbound(m))
            || self.io.iter().any(SocketMsg::is_local)
    }

    fn is_outbound(&self, m: &Msg) -> bool {
        matches!(m, Msg::Call { target, .. } if !self.sys.sites.iter().any(|s| s.id == *target))
    }

    /// Runs every process-local step until none is enabled: expression
    /// steps (unless `interleave`), turning outgoing calls into proxies, and
    /// the socket protocol of proxies and sites. Returns site log lines.
    pub fn local_closure(&mut self, fuel: usize, interleave: bool) -> Result<Vec<String>, SemError> {
        let mut log = Vec::new();
        loop {
            if !interleave {
                self.sys.run_to_quiescence(fuel)?;
            }
            let mut progressed = false;
            for m in self.sys.take_outbound() {
                progressed = true;
                self.open_proxy(m);
            }
            while let Some(i) = self.io.iter().position(SocketMsg::is_local) {
                progressed = true;
                let m = self.io.remove(i);
                self.handle(m, &mut log);
            }
            if !progressed || interleave {
                break;
            }
        }
        self.normalize();
        Ok(log)
    }

    /// Collects dead failed calls and sorts every multiset.
    pub fn normalize(&mut self) {
        self.collect_failed();
        self.io.sort();
        self.proxies.sort();
        self.sys.canonicalize();
    }

    /// Indices into `sys.msgs` of calls leaving the process.
    pub fn outbound(&self) -> Vec<usize> {
        (0..self.sys.msgs.len()).filter(|&i| self.is_outbound(&self.sys.msgs[i])).collect()
    }

    /// Opens a proxy for the outbound call `sys.msgs[i]`.
    pub fn open_proxy_at(&mut self, i: usize) {
        let m = self.sys.msgs.remove(i);
        self.open_proxy(m);
    }

    /// Indices of socket messages the process can consume on its own.
    pub fn consumable(&self) -> Vec<usize> {
        (0..self.io.len()).filter(|&i| self.io[i].is_local()).collect()
    }

    /// Consumes the socket message `io[i]`; returns site log lines.
    pub fn consume_at(&mut self, i: usize) -> Vec<String> {
        let mut log = Vec::new();
        let m = self.io.remove(i);
        self.handle(m, &mut log);
        log
    }

    /// Drops failed calls whose handle no expression still waits on. They
    /// can never act again; only the fact that a failure happened is kept.
    fn collect_failed(&mut self) {
        if !self.io.iter().any(|m| matches!(m, SocketMsg::SocketError { .. })) {
            return;
        }
        let mut live = Vec::new();
        for e in &self.sys.exprs {
            e.exp.pending_ids(&mut live);
        }
        let is_live = |h: &Handle| self.sys.exprs.iter().any(|e| e.id == h.owner) && live.contains(&h.id);
        let dead: Vec<Handle> = self
            .io
            .iter()
            .filter_map(|m| match m {
                SocketMsg::SocketError { owner: Owner::Proxy(h) } if !is_live(h) => Some(h.clone()),
                _ => None,
            })
            .collect();
        if dead.is_empty() {
            return;
        }
        self.failed = true;
        self.io.retain(|m| !matches!(m, SocketMsg::SocketError { owner: Owner::Proxy(h) } if dead.contains(h)));
        self.proxies.retain(|p| !dead.contains(&p.handle));
    }

    fn open_proxy(&mut self, m: Msg) {
        let Msg::Call { target, args, handle, .. } = m else { return };
        match target {
            SiteId::External(loc, _) => {
                let owner = Owner::Proxy(handle.clone());
                self.proxies.push(Proxy { handle, param: Const::Tuple(args), response: None });
                self.io.push(SocketMsg::CreateClient { owner, address: loc.address, port: loc.port });
            }
            SiteId::Internal(name) => log::warn!("dropping call to internal site `{name}` outside its configuration"),
        }
    }

    fn handle(&mut self, m: SocketMsg, log: &mut Vec<String>) {
        use SocketMsg::*;
        match m {
            CreatedServer { owner, server } => self.io.push(AcceptClient { server, owner }),
            AcceptedClient { owner, server, sock } => {
                self.io.push(Receive { sock, owner: owner.clone() });
                self.io.push(AcceptClient { server, owner });
            }
            CreatedSocket { owner: Owner::Proxy(h), sock } => {
                if let Some(p) = self.proxies.iter().find(|p| p.handle == h) {
                    let payload = p.param.clone();
                    self.io.push(Send { sock, owner: Owner::Proxy(h), payload });
                }
            }
            Sent { owner: owner @ Owner::Proxy(_), sock } => self.io.push(Receive { sock, owner }),
            Sent { owner: owner @ Owner::Site(_), sock } => self.io.push(CloseSocket { sock, owner }),
            Received { owner: Owner::Proxy(h), sock, payload, .. } => {
                if let Some(p) = self.proxies.iter_mut().find(|p| p.handle == h) {
                    p.response = Some(payload);
                }
                self.io.push(Receive { sock, owner: Owner::Proxy(h) });
            }
            Received { owner: Owner::Site(id), sock, payload, .. } => {
                let args = match payload {
                    Const::Tuple(args) => args,
                    other => vec![other],
                };
                let (replies, lines) = self.sys.site_request(&id, &args, ReplyTo::Socket(sock));
                log.extend(lines);
                for (to, value) in replies {
                    self.io.push(Send { sock: to, owner: Owner::Site(id.clone()), payload: value });
                }
            }
            ClosedSocket { owner: Owner::Proxy(h), .. } => {
                if let Some(i) = self.proxies.iter().position(|p| p.handle == h) {
                    let p = self.proxies.remove(i);
                    match p.response {
                        Some(value) => self.sys.msgs.push(Msg::Return {
                            target: h.owner.clone(),
                            value,
                            delay: Time::zero(),
                            handle: h,
                        }),
                        None => log::debug!("connection for {h} closed without a response"),
                    }
                }
            }
            ClosedSocket { owner: Owner::Site(_), .. } => {}
            other => log::warn!("unexpected socket message {other:?}"),
        }
    }

    pub fn mte(&self) -> Time {
        use crate::time::Timed;
        self.io
            .iter()
            .filter_map(|m| match m {
                SocketMsg::Received { remaining, .. } => Some(remaining.clone()),
                _ => None,
            })
            .fold(self.sys.mte(), TimeInf::min_of)
    }

    pub fn delta(&mut self, r: &Rational64) {
        use crate::time::Timed;
        self.sys.delta(r);
        for m in &mut self.io {
            if let SocketMsg::Received { remaining, .. } = m {
                *remaining = remaining.monus(r);
            }
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  [{}] {} @ {}  clock {}", self.pid, self.name, self.loc, fmt_rat(&self.sys.clock.now))?;
        for e in &self.sys.exprs {
            writeln!(f, "    {} : {}", e.id, e.exp)?;
        }
        for s in &self.sys.sites {
            writeln!(f, "    {} {} : {}", s.name, s.id, s.state)?;
        }
        for t in &self.sys.timers {
            writeln!(f, "    timer {} in {}", t.handle, t.remaining)?;
        }
        for p in &self.proxies {
            writeln!(f, "    proxy {} param {}", p.handle, p.param)?;
        }
        for m in &self.io {
            writeln!(f, "    {m:?}")?;
        }
        if self.failed {
            writeln!(f, "    (a collected call failed)")?;
        }
        Ok(())
    }
}
