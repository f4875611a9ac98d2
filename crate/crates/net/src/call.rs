use std::io::{Read, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::time::Duration;

use orc_core::{Const, Loc};

use crate::wire::{self, DecodeError};

pub const CONNECT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, thiserror::Error)]
pub enum CallError {
    #[error("cannot resolve {0}")]
    Resolve(Loc),
    #[error("cannot connect to {loc}: {source}")]
    Connect { loc: Loc, source: std::io::Error },
    #[error("i/o error talking to {loc}: {source}")]
    Io { loc: Loc, source: std::io::Error },
    #[error("{loc} closed the connection without replying")]
    NoReply { loc: Loc },
    #[error("undecodable reply from {loc}: {source}")]
    Decode { loc: Loc, source: DecodeError },
}

/// One site call over one connection: send the argument frame, then read
/// until the site closes and decode everything received. Never retries;
/// a call to a silent site blocks for as long as the site keeps the
/// connection open.
pub fn call_site(target: &Loc, args: &Const) -> Result<Const, CallError> {
    let addr = (target.address.as_str(), target.port)
        .to_socket_addrs()
        .ok()
        .and_then(|mut a| a.next())
        .ok_or_else(|| CallError::Resolve(target.clone()))?;
    let mut s = TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT)
        .map_err(|source| CallError::Connect { loc: target.clone(), source })?;
    let io = |source| CallError::Io { loc: target.clone(), source };
    s.set_nodelay(true).map_err(io)?;
    s.write_all(&wire::frame(args)).map_err(io)?;
    s.shutdown(Shutdown::Write).map_err(io)?;
    let mut buf = Vec::new();
    s.read_to_end(&mut buf).map_err(io)?;
    if buf.is_empty() {
        return Err(CallError::NoReply { loc: target.clone() });
    }
    wire::decode_frame(&buf).map_err(|source| CallError::Decode { loc: target.clone(), source })
}
