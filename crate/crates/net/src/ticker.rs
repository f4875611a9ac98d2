use std::io::Write;
use std::net::TcpStream;
use std::thread;
use std::time::{Duration, Instant};

use orc_core::{Const, Loc};

use crate::call::CONNECT_TIMEOUT;
use crate::wire;

pub const CONNECT_RETRIES: u32 = 3;
const RETRY_PAUSE: Duration = Duration::from_millis(500);

/// The tick token: a bare `signal` frame.
pub fn token() -> Vec<u8> {
    wire::frame(&Const::Signal)
}

#[derive(Debug, thiserror::Error)]
pub enum TickerError {
    #[error("cannot reach clock at {loc} after {tries} attempts: {source}")]
    Connect { loc: Loc, tries: u32, source: std::io::Error },
    #[error("clock at {loc} went away: {source}")]
    Disconnected { loc: Loc, source: std::io::Error },
}

fn connect(target: &Loc) -> Result<TcpStream, TickerError> {
    let mut last = None;
    for attempt in 0..=CONNECT_RETRIES {
        if attempt > 0 {
            thread::sleep(RETRY_PAUSE);
        }
        let addr = match std::net::ToSocketAddrs::to_socket_addrs(&(target.address.as_str(), target.port)) {
            Ok(mut a) => a.next(),
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let Some(addr) = addr else { continue };
        match TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    let source = last.unwrap_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "no address"));
    Err(TickerError::Connect { loc: target.clone(), tries: CONNECT_RETRIES + 1, source })
}

/// Connects to a node's clock port and sends one token per period until
/// the node closes the connection. Ticks are scheduled against a fixed
/// start instant, so late wakeups do not accumulate drift.
pub fn run_ticker(target: &Loc, period: Duration) -> Result<(), TickerError> {
    let mut s = connect(target)?;
    let _ = s.set_nodelay(true);
    let tok = token();
    let start = Instant::now();
    let mut due = start;
    loop {
        due += period;
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            thread::sleep(wait);
        }
        s.write_all(&tok).map_err(|source| TickerError::Disconnected { loc: target.clone(), source })?;
    }
}
