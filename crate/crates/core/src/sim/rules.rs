use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use super::process::SocketMsg;
use super::{GlobalSystem, ServerSocket, Socket};
use crate::semantics::{LocalMove, SemError};
use crate::time::{fmt_rat, TimeInf};
use crate::Time;

/// Exploration options.
#[derive(Clone, Debug)]
pub struct SimModel {
    /// Let client socket creation fail spuriously even when the server accepts.
    pub explore_socket_errors: bool,
    /// Branch over every interleaving of expression-level moves instead of
    /// the fixed leftmost-innermost order. Only sensible for small terms.
    pub interleave: bool,
    /// Zeno guard for each local closure.
    pub fuel: usize,
}

impl Default for SimModel {
    fn default() -> Self {
        SimModel { explore_socket_errors: true, interleave: false, fuel: 100_000 }
    }
}

/// Label of one edge of the state graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub rule: String,
    /// Time elapsed by this transition; zero unless it is a tick.
    pub delay: Rational64,
    /// Site log lines produced while closing the successor.
    pub log: Vec<String>,
}

impl Transition {
    fn eager(rule: String, log: Vec<String>) -> Self {
        Transition { rule, delay: Rational64::zero(), log }
    }
}

/// One instance of one rule, applied on its own without any closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawRule {
    Expr {
        pid: usize,
        mv: LocalMove,
    },
    /// Turn the outbound call `sys.msgs[i]` into a proxy.
    OpenProxy {
        pid: usize,
        i: usize,
    },
    /// Consume the local socket message `io[i]`.
    Consume {
        pid: usize,
        i: usize,
    },
    CreateServer {
        pid: usize,
        i: usize,
    },
    Close {
        pid: usize,
        i: usize,
        peer: usize,
    },
    Exchange {
        pid: usize,
        i: usize,
        delay: Time,
    },
    ClientSuccess {
        pid: usize,
        i: usize,
    },
    ClientFail {
        pid: usize,
        i: usize,
    },
}

enum Branch {
    Local(usize, Vec<LocalMove>),
    Client(usize, usize),
    Exchange(usize, usize),
}

fn proc_mut(s: &mut GlobalSystem, pid: usize) -> &mut super::Process {
    let p = Arc::make_mut(&mut s.procs[pid]);
    p.touch();
    p
}

/// Adds a socket message keeping the multiset sorted.
fn push_io(s: &mut GlobalSystem, pid: usize, m: SocketMsg) {
    let io = &mut proc_mut(s, pid).io;
    let at = io.partition_point(|x| *x <= m);
    io.insert(at, m);
}

impl SimModel {
    pub fn new(explore_socket_errors: bool) -> Self {
        SimModel { explore_socket_errors, ..Default::default() }
    }

    /// Closes `s` under all deterministic steps.
    pub fn initial(&self, mut s: GlobalSystem) -> Result<GlobalSystem, SemError> {
        self.close(&mut s, &mut Vec::new())?;
        Ok(s)
    }

    /// Applies process-local closures and deterministic global rules until
    /// only branching rules (or nothing) remain.
    pub fn close(&self, s: &mut GlobalSystem, log: &mut Vec<String>) -> Result<(), SemError> {
        loop {
            for pid in 0..s.procs.len() {
                if s.procs[pid].local_enabled(self.interleave) {
                    log.extend(proc_mut(s, pid).local_closure(self.fuel, self.interleave)?);
                }
            }
            if !self.deterministic_global_step(s) {
                return Ok(());
            }
        }
    }

    fn deterministic_global_step(&self, s: &mut GlobalSystem) -> bool {
        if let Some((pid, i)) = find_create_server(s) {
            create_server(s, pid, i);
            return true;
        }
        if let Some((pid, i, peer)) = find_close(s) {
            close_socket(s, pid, i, peer);
            return true;
        }
        if s.delays.len() == 1 {
            if let Some((pid, i)) = find_exchange(s) {
                let d = s.delays[0].clone();
                exchange(s, pid, i, d);
                return true;
            }
        }
        for (pid, i) in client_requests(s) {
            match (client_target(s, pid, i), self.explore_socket_errors) {
                (Target::Missing, true) => {
                    client_fail(s, pid, i);
                    return true;
                }
                (Target::Accepting(..), false) => {
                    client_success(s, pid, i);
                    return true;
                }
                _ => {}
            }
        }
        false
    }

    fn branch(&self, s: &GlobalSystem) -> Option<Branch> {
        if self.interleave {
            for (pid, p) in s.procs.iter().enumerate() {
                let moves = p.sys.moves(true);
                if !moves.is_empty() {
                    return Some(Branch::Local(pid, moves));
                }
            }
        }
        if self.explore_socket_errors {
            for (pid, i) in client_requests(s) {
                if let Target::Accepting(..) = client_target(s, pid, i) {
                    return Some(Branch::Client(pid, i));
                }
            }
        }
        if s.delays.len() > 1 {
            if let Some((pid, i)) = find_exchange(s) {
                return Some(Branch::Exchange(pid, i));
            }
        }
        None
    }

    /// True iff some instantaneous transition is enabled.
    pub fn eager_enabled(&self, s: &GlobalSystem) -> bool {
        s.procs.iter().any(|p| p.local_enabled(false))
            || find_create_server(s).is_some()
            || find_close(s).is_some()
            || find_exchange(s).is_some()
            || client_requests(s).into_iter().any(|(pid, i)| match client_target(s, pid, i) {
                Target::Missing => self.explore_socket_errors,
                Target::Accepting(..) => true,
                Target::Busy => false,
            })
    }

    /// Largest time elapse that skips no pending event.
    pub fn mte(&self, s: &GlobalSystem) -> Time {
        s.procs.iter().map(|p| p.mte()).fold(TimeInf::Infinity, TimeInf::min_of)
    }

    /// Advances every clock and delay by `r` (no closure).
    pub fn delta(&self, s: &mut GlobalSystem, r: &Rational64) {
        for pid in 0..s.procs.len() {
            proc_mut(s, pid).delta(r);
        }
        s.elapsed += r;
    }

    /// The tick by `mte`, if time may pass: nothing instantaneous is
    /// enabled and `mte` is finite and positive.
    pub fn global_tick(&self, s: &GlobalSystem) -> Result<Option<(GlobalSystem, Transition)>, SemError> {
        if self.eager_enabled(s) {
            return Ok(None);
        }
        self.tick_unchecked(s)
    }

    fn tick_unchecked(&self, s: &GlobalSystem) -> Result<Option<(GlobalSystem, Transition)>, SemError> {
        let r = match self.mte(s) {
            TimeInf::Finite(r) if r.is_positive() => r,
            _ => return Ok(None),
        };
        let mut next = s.clone();
        self.delta(&mut next, &r);
        let mut log = Vec::new();
        self.close(&mut next, &mut log)?;
        Ok(Some((next, Transition { rule: format!("tick({})", fmt_rat(&r)), delay: r, log })))
    }

    /// Successors of a closed state: the alternatives of its first branch
    /// point, each closed again, or else the tick, or nothing.
    pub fn successors(&self, s: &GlobalSystem) -> Result<Vec<(GlobalSystem, Transition)>, SemError> {
        let Some(b) = self.branch(s) else {
            return Ok(self.tick_unchecked(s)?.into_iter().collect());
        };
        let mut alts: Vec<(GlobalSystem, String)> = Vec::new();
        match b {
            Branch::Local(pid, moves) => {
                for mv in moves {
                    let mut next = s.clone();
                    let p = proc_mut(&mut next, pid);
                    let ev = p.sys.apply(&mv)?;
                    p.normalize();
                    alts.push((next, format!("local[{pid}] {ev:?}")));
                }
            }
            Branch::Client(pid, i) => {
                let mut ok = s.clone();
                client_success(&mut ok, pid, i);
                alts.push((ok, "createClientSuccess".into()));
                let mut fail = s.clone();
                client_fail(&mut fail, pid, i);
                alts.push((fail, "createClientFail".into()));
            }
            Branch::Exchange(pid, i) => {
                for d in s.delays.iter() {
                    let mut next = s.clone();
                    exchange(&mut next, pid, i, d.clone());
                    alts.push((next, format!("exchange({d})")));
                }
            }
        }
        alts.into_iter()
            .map(|(mut next, rule)| {
                let mut log = Vec::new();
                self.close(&mut next, &mut log)?;
                Ok((next, Transition::eager(rule, log)))
            })
            .collect()
    }

    /// Every enabled instance of every instantaneous rule. Expression moves
    /// keep the local priority classes, and without `interleave` only the
    /// first of them is offered; nothing else is ordered.
    pub fn raw_rules(&self, s: &GlobalSystem) -> Vec<RawRule> {
        let mut out = Vec::new();
        for (pid, p) in s.procs.iter().enumerate() {
            out.extend(p.sys.moves(self.interleave).into_iter().map(|mv| RawRule::Expr { pid, mv }));
            out.extend(p.outbound().into_iter().map(|i| RawRule::OpenProxy { pid, i }));
            out.extend(p.consumable().into_iter().map(|i| RawRule::Consume { pid, i }));
            for (i, m) in p.io.iter().enumerate() {
                match m {
                    SocketMsg::CreateServer { .. } => out.push(RawRule::CreateServer { pid, i }),
                    SocketMsg::CloseSocket { sock, .. } => {
                        if let Some(k) = socket(s, *sock) {
                            let peer = k.peer(pid);
                            if receive_pos(s, peer, *sock).is_some() {
                                out.push(RawRule::Close { pid, i, peer });
                            }
                        }
                    }
                    SocketMsg::Send { sock, .. } => {
                        if socket(s, *sock).is_some_and(|k| receive_pos(s, k.peer(pid), *sock).is_some()) {
                            out.extend(s.delays.iter().map(|d| RawRule::Exchange { pid, i, delay: d.clone() }));
                        }
                    }
                    SocketMsg::CreateClient { .. } => {
                        let target = client_target(s, pid, i);
                        if let Target::Accepting(..) = target {
                            out.push(RawRule::ClientSuccess { pid, i });
                        }
                        if self.explore_socket_errors && !matches!(target, Target::Busy) {
                            out.push(RawRule::ClientFail { pid, i });
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Applies one rule instance from [`SimModel::raw_rules`]; returns site
    /// log lines. Each touched process is normalized afterwards.
    pub fn apply_raw(&self, s: &mut GlobalSystem, r: &RawRule) -> Result<Vec<String>, SemError> {
        let mut log = Vec::new();
        match r {
            RawRule::Expr { pid, mv } => {
                let p = proc_mut(s, *pid);
                p.sys.apply(mv)?;
                p.normalize();
            }
            RawRule::OpenProxy { pid, i } => {
                let p = proc_mut(s, *pid);
                p.open_proxy_at(*i);
                p.normalize();
            }
            RawRule::Consume { pid, i } => {
                let p = proc_mut(s, *pid);
                log = p.consume_at(*i);
                p.normalize();
            }
            RawRule::CreateServer { pid, i } => create_server(s, *pid, *i),
            RawRule::Close { pid, i, peer } => close_socket(s, *pid, *i, *peer),
            RawRule::Exchange { pid, i, delay } => exchange(s, *pid, *i, delay.clone()),
            RawRule::ClientSuccess { pid, i } => client_success(s, *pid, *i),
            RawRule::ClientFail { pid, i } => client_fail(s, *pid, *i),
        }
        Ok(log)
    }

    /// `[CreateServerTcpSocket]` on the first pending request.
    pub fn apply_create_server(&self, s: &GlobalSystem) -> Option<GlobalSystem> {
        let (pid, i) = find_create_server(s)?;
        let mut next = s.clone();
        create_server(&mut next, pid, i);
        Some(next)
    }

    /// Success and failure of the first pending client socket creation.
    pub fn client_socket_successors(&self, s: &GlobalSystem) -> Vec<GlobalSystem> {
        let Some(&(pid, i)) = client_requests(s).first() else { return Vec::new() };
        let mut out = Vec::new();
        if let Target::Accepting(..) = client_target(s, pid, i) {
            let mut ok = s.clone();
            client_success(&mut ok, pid, i);
            out.push(ok);
        }
        let mut fail = s.clone();
        client_fail(&mut fail, pid, i);
        out.push(fail);
        out
    }

    /// One successor per delay for the first matched send/receive pair.
    pub fn exchange_successors(&self, s: &GlobalSystem) -> Vec<GlobalSystem> {
        let Some((pid, i)) = find_exchange(s) else { return Vec::new() };
        s.delays
            .iter()
            .map(|d| {
                let mut next = s.clone();
                exchange(&mut next, pid, i, d.clone());
                next
            })
            .collect()
    }

    /// `[close]` on the first closable socket.
    pub fn apply_close(&self, s: &GlobalSystem) -> Option<GlobalSystem> {
        let (pid, i, peer) = find_close(s)?;
        let mut next = s.clone();
        close_socket(&mut next, pid, i, peer);
        Some(next)
    }
}

fn find_create_server(s: &GlobalSystem) -> Option<(usize, usize)> {
    s.procs
        .iter()
        .enumerate()
        .find_map(|(pid, p)| p.io.iter().position(|m| matches!(m, SocketMsg::CreateServer { .. })).map(|i| (pid, i)))
}

fn create_server(s: &mut GlobalSystem, pid: usize, i: usize) {
    let id = s.counter;
    s.counter += 1;
    let address = s.procs[pid].loc.address.clone();
    let SocketMsg::CreateServer { owner, port } = proc_mut(s, pid).io.remove(i) else { unreachable!() };
    push_io(s, pid, SocketMsg::CreatedServer { owner, server: id });
    s.servers.push(ServerSocket { id, address, port, pid });
}

fn receive_pos(s: &GlobalSystem, pid: usize, sock: u64) -> Option<usize> {
    s.procs[pid].io.iter().position(|m| matches!(m, SocketMsg::Receive { sock: k, .. } if *k == sock))
}

fn socket(s: &GlobalSystem, sock: u64) -> Option<&Socket> {
    s.sockets.iter().find(|k| k.id == sock)
}

fn find_close(s: &GlobalSystem) -> Option<(usize, usize, usize)> {
    for (pid, p) in s.procs.iter().enumerate() {
        for (i, m) in p.io.iter().enumerate() {
            if let SocketMsg::CloseSocket { sock, .. } = m {
                if let Some(k) = socket(s, *sock) {
                    let peer = k.peer(pid);
                    if receive_pos(s, peer, *sock).is_some() {
                        return Some((pid, i, peer));
                    }
                }
            }
        }
    }
    None
}

fn close_socket(s: &mut GlobalSystem, pid: usize, i: usize, peer: usize) {
    let SocketMsg::CloseSocket { sock, owner } = proc_mut(s, pid).io.remove(i) else { unreachable!() };
    let j = receive_pos(s, peer, sock).expect("close needs a receive");
    let SocketMsg::Receive { owner: peer_owner, .. } = proc_mut(s, peer).io.remove(j) else { unreachable!() };
    s.sockets.retain(|k| k.id != sock);
    push_io(s, pid, SocketMsg::ClosedSocket { owner, sock });
    push_io(s, peer, SocketMsg::ClosedSocket { owner: peer_owner, sock });
}

fn find_exchange(s: &GlobalSystem) -> Option<(usize, usize)> {
    for (pid, p) in s.procs.iter().enumerate() {
        for (i, m) in p.io.iter().enumerate() {
            if let SocketMsg::Send { sock, .. } = m {
                if let Some(k) = socket(s, *sock) {
                    if receive_pos(s, k.peer(pid), *sock).is_some() {
                        return Some((pid, i));
                    }
                }
            }
        }
    }
    None
}

fn exchange(s: &mut GlobalSystem, pid: usize, i: usize, delay: Time) {
    let SocketMsg::Send { sock, owner, payload } = proc_mut(s, pid).io.remove(i) else { unreachable!() };
    let peer = socket(s, sock).expect("exchange on a live socket").peer(pid);
    let j = receive_pos(s, peer, sock).expect("exchange needs a receive");
    let SocketMsg::Receive { owner: receiver, .. } = proc_mut(s, peer).io.remove(j) else { unreachable!() };
    push_io(s, pid, SocketMsg::Sent { owner, sock });
    push_io(s, peer, SocketMsg::Received { owner: receiver, sock, payload, remaining: delay });
}

fn client_requests(s: &GlobalSystem) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (pid, p) in s.procs.iter().enumerate() {
        for (i, m) in p.io.iter().enumerate() {
            if matches!(m, SocketMsg::CreateClient { .. }) {
                out.push((pid, i));
            }
        }
    }
    out
}

enum Target {
    Missing,
    Busy,
    /// Server pid and the index of its `AcceptClient`.
    Accepting(usize, usize, u64),
}

fn client_target(s: &GlobalSystem, pid: usize, i: usize) -> Target {
    let SocketMsg::CreateClient { address, port, .. } = &s.procs[pid].io[i] else { unreachable!() };
    let Some(server) = s.server_at(address, *port) else { return Target::Missing };
    let spid = server.pid;
    match s.procs[spid]
        .io
        .iter()
        .position(|m| matches!(m, SocketMsg::AcceptClient { server: n, .. } if *n == server.id))
    {
        Some(j) => Target::Accepting(spid, j, server.id),
        None => Target::Busy,
    }
}

fn client_success(s: &mut GlobalSystem, pid: usize, i: usize) {
    let Target::Accepting(spid, j, server) = client_target(s, pid, i) else { unreachable!() };
    let sock = s.counter;
    s.counter += 1;
    let SocketMsg::AcceptClient { owner: acceptor, .. } = proc_mut(s, spid).io.remove(j) else { unreachable!() };
    // the server and client may share a process, so re-find the request
    let i = if spid == pid && j < i { i - 1 } else { i };
    let SocketMsg::CreateClient { owner, .. } = proc_mut(s, pid).io.remove(i) else { unreachable!() };
    push_io(s, spid, SocketMsg::AcceptedClient { owner: acceptor, server, sock });
    push_io(s, pid, SocketMsg::CreatedSocket { owner, sock });
    s.sockets.push(Socket { id: sock, endpoints: (spid, pid) });
}

fn client_fail(s: &mut GlobalSystem, pid: usize, i: usize) {
    let SocketMsg::CreateClient { owner, .. } = proc_mut(s, pid).io.remove(i) else { unreachable!() };
    push_io(s, pid, SocketMsg::SocketError { owner });
    proc_mut(s, pid).normalize();
}
