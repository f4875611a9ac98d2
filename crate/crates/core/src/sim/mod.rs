//! Abstract socket model of a distributed deployment.
//!
//! Each node is a [`Process`] wrapping a [`LocalConfig`]. Site calls leave a
//! process through a per-call proxy that opens a client socket, sends the
//! arguments, waits for the reply and hands it back when the site closes the
//! connection. Messages through sockets take a delay drawn from a finite
//! delay set; an infinite delay loses the message. Time advances globally
//! and synchronously, by the maximal amount, only when nothing instantaneous
//! is left to do.
//!
//! Branching is kept to the points where the model is genuinely
//! nondeterministic: the choice of delay and the success or failure of
//! client socket creation. Everything else is fused into each successor.

mod process;
mod rules;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Rational64;

pub use process::{Owner, Process, Proxy, SocketMsg};
pub use rules::{RawRule, SimModel, Transition};

use crate::time::fmt_rat;
use crate::value::Loc;
use crate::Time;

/// `server(n)`: a listening socket.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ServerSocket {
    pub id: u64,
    pub address: String,
    pub port: u16,
    pub pid: usize,
}

/// `socket(n)` with endpoints `[server side, client side]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Socket {
    pub id: u64,
    pub endpoints: (usize, usize),
}

impl Socket {
    pub fn peer(&self, pid: usize) -> usize {
        if self.endpoints.0 == pid {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalSystem {
    /// Indexed by pid.
    pub procs: Vec<Arc<Process>>,
    pub servers: Vec<ServerSocket>,
    pub sockets: Vec<Socket>,
    /// The socket manager's counter.
    pub counter: u64,
    pub delays: Arc<Vec<Time>>,
    pub elapsed: Rational64,
}

impl GlobalSystem {
    pub fn new(procs: Vec<Process>, delays: Vec<Time>) -> Self {
        assert!(!delays.is_empty(), "the delay set must be nonempty");
        let procs = procs
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                p.pid = i;
                Arc::new(p)
            })
            .collect();
        GlobalSystem {
            procs,
            servers: Vec::new(),
            sockets: Vec::new(),
            counter: 0,
            delays: Arc::new(delays),
            elapsed: Rational64::from_integer(0),
        }
    }

    pub fn proc_named(&self, name: &str) -> Option<&Process> {
        self.procs.iter().map(|p| &**p).find(|p| p.name == name)
    }

    pub fn server_at(&self, address: &str, port: u16) -> Option<&ServerSocket> {
        self.servers.iter().find(|s| s.address == address && s.port == port)
    }

    pub fn server_for(&self, loc: &Loc) -> Option<&ServerSocket> {
        self.server_at(&loc.address, loc.port)
    }

    /// A 128-bit digest of the state, built from memoized per-process
    /// digests so unchanged processes are not rehashed.
    pub fn fingerprint(&self) -> u128 {
        let mut a = DefaultHasher::new();
        let mut b = DefaultHasher::new();
        0x9e37_79b9_u32.hash(&mut b);
        for h in [&mut a, &mut b] {
            for p in &self.procs {
                p.digest().hash(h);
            }
            self.servers.hash(h);
            self.sockets.hash(h);
            self.counter.hash(h);
            self.delays.hash(h);
            self.elapsed.hash(h);
        }
        ((a.finish() as u128) << 64) | b.finish() as u128
    }

    pub fn has_socket_error(&self) -> bool {
        self.procs.iter().any(|p| p.failed || p.io.iter().any(|m| matches!(m, SocketMsg::SocketError { .. })))
    }
}

impl fmt::Display for GlobalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "time {}  counter {}", fmt_rat(&self.elapsed), self.counter)?;
        for p in &self.procs {
            write!(f, "{p}")?;
        }
        for s in &self.servers {
            writeln!(f, "  server({}) {}:{} @{}", s.id, s.address, s.port, s.pid)?;
        }
        for s in &self.sockets {
            writeln!(f, "  socket({}) [{} : {}]", s.id, s.endpoints.0, s.endpoints.1)?;
        }
        Ok(())
    }
}
