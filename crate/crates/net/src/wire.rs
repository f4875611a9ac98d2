//! Textual encoding of constants and newline framing.
//!
//! Every constant starts with a tag character:
//!
//! | value            | encoding          |
//! |------------------|-------------------|
//! | `signal`         | `!`               |
//! | booleans         | `t`, `f`          |
//! | integers         | `i1910`, `i-3`    |
//! | rationals        | `r7/2`            |
//! | strings          | `s"post\nNext"`   |
//! | tuples           | `(i1,s"a",!)`     |
//! | site references  | `@Auction`        |
//!
//! Strings escape `\`, `"`, newline and carriage return, so an encoded
//! constant never contains the frame terminator `0x0A`.

use std::io::{self, BufRead, Write};

use num_rational::Rational64;
use orc_core::Const;

/// Ends every frame.
pub const SEP: u8 = b'\n';

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("bad frame at byte {offset}: {msg}")]
pub struct DecodeError {
    pub offset: usize,
    pub msg: String,
}

pub fn encode(c: &Const) -> String {
    let mut out = String::new();
    encode_into(c, &mut out);
    out
}

fn encode_into(c: &Const, out: &mut String) {
    match c {
        Const::Signal => out.push('!'),
        Const::Bool(true) => out.push('t'),
        Const::Bool(false) => out.push('f'),
        Const::Int(i) => {
            out.push('i');
            out.push_str(&i.to_string());
        }
        Const::Rat(r) => {
            out.push('r');
            out.push_str(&format!("{}/{}", r.numer(), r.denom()));
        }
        Const::Str(s) => {
            out.push_str("s\"");
            for ch in s.chars() {
                match ch {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Const::Tuple(v) => {
            out.push('(');
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                encode_into(c, out);
            }
            out.push(')');
        }
        Const::SiteRef(name) => {
            out.push('@');
            out.push_str(name);
        }
    }
}

/// The encoding followed by the terminator.
pub fn frame(c: &Const) -> Vec<u8> {
    let mut b = encode(c).into_bytes();
    b.push(SEP);
    b
}

pub fn decode(s: &str) -> Result<Const, DecodeError> {
    let mut p = Decoder { s: s.as_bytes(), pos: 0 };
    let c = p.value()?;
    if p.pos != s.len() {
        return Err(p.err("trailing bytes"));
    }
    Ok(c)
}

/// Decodes a payload that may still carry its terminator.
pub fn decode_frame(b: &[u8]) -> Result<Const, DecodeError> {
    let b = b.strip_suffix(&[SEP]).unwrap_or(b);
    let s = std::str::from_utf8(b).map_err(|e| DecodeError { offset: e.valid_up_to(), msg: "invalid UTF-8".into() })?;
    decode(s)
}

/// Reads one frame; `None` on a clean end of stream.
pub fn read_frame(r: &mut impl BufRead) -> io::Result<Option<Const>> {
    let mut buf = Vec::new();
    if r.read_until(SEP, &mut buf)? == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&SEP) {
        return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated frame"));
    }
    decode_frame(&buf).map(Some).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

pub fn write_frame(w: &mut impl Write, c: &Const) -> io::Result<()> {
    w.write_all(&frame(c))?;
    w.flush()
}

struct Decoder<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Decoder<'_> {
    fn err(&self, msg: &str) -> DecodeError {
        DecodeError { offset: self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        self.pos += b.is_some() as usize;
        b
    }

    fn expect(&mut self, b: u8) -> Result<(), DecodeError> {
        match self.bump() {
            Some(x) if x == b => Ok(()),
            _ => Err(DecodeError { offset: self.pos.saturating_sub(1), msg: format!("expected `{}`", b as char) }),
        }
    }

    fn int(&mut self) -> Result<i64, DecodeError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or(DecodeError { offset: start, msg: "bad integer".into() })
    }

    fn value(&mut self) -> Result<Const, DecodeError> {
        let at = self.pos;
        match self.bump() {
            Some(b'!') => Ok(Const::Signal),
            Some(b't') => Ok(Const::Bool(true)),
            Some(b'f') => Ok(Const::Bool(false)),
            Some(b'i') => self.int().map(Const::Int),
            Some(b'r') => {
                let n = self.int()?;
                self.expect(b'/')?;
                let d = self.int()?;
                if d <= 0 {
                    return Err(DecodeError { offset: at, msg: "denominator must be positive".into() });
                }
                Ok(Const::Rat(Rational64::new(n, d)))
            }
            Some(b's') => self.string().map(Const::Str),
            Some(b'(') => {
                let mut items = Vec::new();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    return Ok(Const::Tuple(items));
                }
                loop {
                    items.push(self.value()?);
                    match self.bump() {
                        Some(b',') => continue,
                        Some(b')') => return Ok(Const::Tuple(items)),
                        _ => {
                            return Err(DecodeError {
                                offset: self.pos.saturating_sub(1),
                                msg: "expected `,` or `)`".into(),
                            })
                        }
                    }
                }
            }
            Some(b'@') => {
                let start = self.pos;
                while self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'\'') {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.err("empty site name"));
                }
                Ok(Const::SiteRef(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()))
            }
            Some(_) => Err(DecodeError { offset: at, msg: "unknown tag".into() }),
            None => Err(self.err("unexpected end")),
        }
    }

    fn string(&mut self) -> Result<String, DecodeError> {
        self.expect(b'"')?;
        let mut out = Vec::new();
        loop {
            match self.bump() {
                Some(b'"') => break,
                Some(b'\\') => out.push(match self.bump() {
                    Some(b'n') => b'\n',
                    Some(b'r') => b'\r',
                    Some(b'"') => b'"',
                    Some(b'\\') => b'\\',
                    _ => return Err(DecodeError { offset: self.pos.saturating_sub(1), msg: "bad escape".into() }),
                }),
                Some(SEP) => return Err(DecodeError { offset: self.pos - 1, msg: "raw newline in string".into() }),
                Some(b) => out.push(b),
                None => return Err(self.err("unterminated string")),
            }
        }
        String::from_utf8(out).map_err(|_| self.err("invalid UTF-8 in string"))
    }
}
