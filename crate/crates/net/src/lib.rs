//! The distributed runtime: nodes talk over TCP, one connection per site
//! call, and each node's logical clock is driven by a ticker sending one
//! token per period.
//!
//! A node's event loop owns its configuration. Returns, site requests and
//! ticks arrive through one inbox; all internal work is finished before a
//! tick is taken, so a tick period longer than a node's busiest instant
//! makes the wall-clock run agree with the timed semantics.

mod call;
mod config;
mod node;
mod ticker;
pub mod wire;

pub use call::{call_site, CallError, CONNECT_TIMEOUT};
pub use config::{parse_loc, ConfigError, Node, NodeConfig, Role, RoleConfig, SiteRegistry, MIN_TICK_MS};
pub use node::{run_node, spawn_node, LogSink, NodeError, NodeHandle, NodeStats};
pub use ticker::{run_ticker, token, TickerError, CONNECT_RETRIES};
