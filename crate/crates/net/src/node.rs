use std::collections::HashMap;
use std::io::{BufReader, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use num_rational::Rational64;
use orc_core::semantics::{
    env_of, Action, Directory, Event, ExprObject, LocalConfig, Msg, ReplyTo, SemError, SiteObject,
};
use orc_core::time::Timed;
use orc_core::{Const, EOid, Handle, Loc, SiteId, Time};

use crate::call::call_site;
use crate::config::{Node, Role};
use crate::ticker::run_ticker;
use crate::wire;

/// Receives every log line a node produces.
pub type LogSink = Arc<dyn Fn(&str) + Send + Sync>;

#[derive(Debug, thiserror::Error)]
pub enum NodeError {
    #[error("cannot listen on {loc}: {source}")]
    Bind { loc: Loc, source: std::io::Error },
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// Counters kept by the event loop.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeStats {
    pub ticks: u64,
    /// Outgoing connections, one per external call.
    pub calls: u64,
    pub returns: u64,
    pub failed_calls: u64,
    pub requests: u64,
    /// Ticks consumed while another was already queued.
    pub overruns: u64,
}

enum Inbox {
    Tick,
    Return { handle: Handle, value: Const },
    CallFailed { handle: Handle, error: String },
    Request { conn: u64, args: Vec<Const>, stream: TcpStream },
    Stop,
}

/// A node running on its own thread.
pub struct NodeHandle {
    tx: Sender<Inbox>,
    thread: JoinHandle<Result<NodeStats, NodeError>>,
}

impl NodeHandle {
    /// Stops the event loop and returns its counters. Listener threads are
    /// left behind until the process exits.
    pub fn stop(self) -> Result<NodeStats, NodeError> {
        let _ = self.tx.send(Inbox::Stop);
        self.thread.join().expect("node thread panicked")
    }
}

/// Binds the node's sockets and starts its event loop on a new thread.
pub fn spawn_node(node: Node, sink: LogSink) -> Result<NodeHandle, NodeError> {
    let (tx, rx) = mpsc::channel();
    let rt = Runtime::start(node, sink, tx.clone(), rx)?;
    let thread = thread::Builder::new().name("orc-node".into()).spawn(move || rt.run()).expect("spawn node thread");
    Ok(NodeHandle { tx, thread })
}

/// Runs a node on the calling thread until it is stopped or fails.
pub fn run_node(node: Node, sink: LogSink) -> Result<NodeStats, NodeError> {
    let (tx, rx) = mpsc::channel();
    Runtime::start(node, sink, tx, rx)?.run()
}

struct Runtime {
    node: Node,
    sys: LocalConfig,
    site: Option<SiteId>,
    tx: Sender<Inbox>,
    rx: Receiver<Inbox>,
    sink: LogSink,
    /// Connections whose reply is still owed, by connection id.
    parked: HashMap<u64, TcpStream>,
    ticks: u64,
    stats: NodeStats,
}

fn bind(loc: &Loc) -> Result<TcpListener, NodeError> {
    TcpListener::bind((loc.address.as_str(), loc.port)).map_err(|source| NodeError::Bind { loc: loc.clone(), source })
}

impl Runtime {
    fn start(node: Node, sink: LogSink, tx: Sender<Inbox>, rx: Receiver<Inbox>) -> Result<Self, NodeError> {
        let clock_loc = Loc::new("localhost", node.clock_port);
        let clock = bind(&clock_loc)?;
        let mut site = None;
        let sys = match &node.role {
            Role::Expr { program, goal } => {
                let dir: Directory =
                    node.peers.iter().map(|(name, loc)| (name.clone(), SiteId::External(loc.clone(), 0))).collect();
                let mut sys = LocalConfig::new(Arc::new(dir));
                let env = Arc::new(env_of(program));
                sys.exprs.push(ExprObject::new(EOid::new(node.self_loc.clone(), 0), env, goal));
                sys
            }
            Role::Site { behavior, state } => {
                let id = SiteId::External(node.self_loc.clone(), 0);
                let listener = bind(&node.self_loc)?;
                let mut sys = LocalConfig::default();
                sys.sites.push(SiteObject::new(id.clone(), behavior.clone(), state.clone()));
                site = Some(id);
                spawn_acceptor(listener, tx.clone());
                sys
            }
        };
        spawn_clock(clock, tx.clone());
        if node.spawn_ticker {
            let period = node.tick_period;
            let s = sink.clone();
            thread::spawn(move || {
                if let Err(e) = run_ticker(&clock_loc, period) {
                    s(&format!("ticker stopped: {e}"));
                }
            });
        }
        Ok(Runtime { node, sys, site, tx, rx, sink, parked: HashMap::new(), ticks: 0, stats: NodeStats::default() })
    }

    fn log(&self, line: &str) {
        (self.sink)(line);
    }

    /// The loop. Internal work always goes first: every queued return and
    /// request is applied and the configuration is run to quiescence
    /// before a single tick is consumed.
    fn run(mut self) -> Result<NodeStats, NodeError> {
        loop {
            let mut busy = false;
            while let Ok(ev) = self.rx.try_recv() {
                match self.accept(ev) {
                    Some(b) => busy |= b,
                    None => return Ok(self.stats),
                }
            }
            busy |= self.quiesce()?;
            if busy {
                continue;
            }
            if self.ticks > 0 {
                self.tick();
                continue;
            }
            let ev = self.rx.recv().expect("the runtime holds a sender");
            if self.accept(ev).is_none() {
                return Ok(self.stats);
            }
        }
    }

    /// Applies one inbox event. `Some(true)` when it created internal work,
    /// `None` on stop.
    fn accept(&mut self, ev: Inbox) -> Option<bool> {
        match ev {
            Inbox::Stop => return None,
            Inbox::Tick => {
                self.ticks += 1;
                return Some(false);
            }
            Inbox::Return { handle, value } => {
                self.stats.returns += 1;
                let target = handle.owner.clone();
                self.sys.msgs.push(Msg::Return { target, value, delay: Time::zero(), handle });
            }
            Inbox::CallFailed { handle, error } => {
                // fatal for the call: its handle stays pending forever
                self.stats.failed_calls += 1;
                self.log(&format!("Call {handle} failed: {error}"));
                return Some(false);
            }
            Inbox::Request { conn, args, stream } => {
                self.stats.requests += 1;
                self.parked.insert(conn, stream);
                let site = self.site.clone().expect("only site nodes accept requests");
                let (replies, lines) = self.sys.site_request(&site, &args, ReplyTo::Socket(conn));
                for l in &lines {
                    self.log(l);
                }
                self.reply(replies);
            }
        }
        Some(true)
    }

    fn reply(&mut self, replies: Vec<(u64, Const)>) {
        for (conn, value) in replies {
            if let Some(mut s) = self.parked.remove(&conn) {
                if let Err(e) = s.write_all(&wire::frame(&value)) {
                    log::warn!("reply on connection {conn} lost: {e}");
                }
                let _ = s.shutdown(Shutdown::Both);
            }
        }
    }

    fn quiesce(&mut self) -> Result<bool, NodeError> {
        let mut lines = Vec::new();
        let mut socket_replies = Vec::new();
        let steps = self.sys.run_to_quiescence_with(self.node.fuel, |ev| match ev {
            Event::Expr { action: Action::Publish(c), id } => lines.push(format!("{id} published {c}")),
            Event::Expr { action: Action::DeadCall { name }, id } => lines.push(format!("{id} cannot call {name}")),
            Event::SiteCalled { socket_replies: r, log, .. } => {
                lines.extend(log.iter().cloned());
                socket_replies.extend(r.iter().cloned());
            }
            _ => {}
        })?;
        for l in &lines {
            self.log(l);
        }
        self.reply(socket_replies);
        let out = self.sys.take_outbound();
        let dispatched = !out.is_empty();
        for m in out {
            self.dispatch(m);
        }
        Ok(steps > 0 || dispatched)
    }

    fn dispatch(&mut self, m: Msg) {
        let Msg::Call { target, args, handle, .. } = m else { return };
        let SiteId::External(loc, _) = target else {
            log::warn!("dropping call to {target} outside its configuration");
            return;
        };
        self.stats.calls += 1;
        let tx = self.tx.clone();
        thread::spawn(move || {
            let ev = match call_site(&loc, &Const::Tuple(args)) {
                Ok(value) => Inbox::Return { handle, value },
                Err(e) => Inbox::CallFailed { handle, error: e.to_string() },
            };
            let _ = tx.send(ev);
        });
    }

    fn tick(&mut self) {
        if self.ticks > 1 {
            self.stats.overruns += 1;
            log::warn!("{}: {} ticks queued; the tick period is too short for this node", self.node.name, self.ticks);
        }
        debug_assert!(!self.sys.has_redex());
        self.ticks -= 1;
        self.stats.ticks += 1;
        self.sys.delta(&Rational64::from_integer(1));
        self.log("Tick!");
    }
}

static NEXT_CONN: AtomicU64 = AtomicU64::new(0);

fn spawn_acceptor(listener: TcpListener, tx: Sender<Inbox>) {
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let tx = tx.clone();
            thread::spawn(move || {
                let conn = NEXT_CONN.fetch_add(1, Ordering::Relaxed);
                let Ok(read) = stream.try_clone() else { return };
                match wire::read_frame(&mut BufReader::new(read)) {
                    Ok(Some(c)) => {
                        let args = match c {
                            Const::Tuple(v) => v,
                            other => vec![other],
                        };
                        let _ = tx.send(Inbox::Request { conn, args, stream });
                    }
                    Ok(None) => {}
                    Err(e) => log::warn!("dropping connection: {e}"),
                }
            });
        }
    });
}

fn spawn_clock(listener: TcpListener, tx: Sender<Inbox>) {
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let mut r = BufReader::new(stream);
            loop {
                match wire::read_frame(&mut r) {
                    Ok(Some(Const::Signal)) => {
                        if tx.send(Inbox::Tick).is_err() {
                            return;
                        }
                    }
                    Ok(Some(other)) => log::warn!("ignoring clock frame {other}"),
                    Ok(None) | Err(_) => break,
                }
            }
        }
    });
}
