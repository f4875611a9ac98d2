//! Constants exchanged with sites, and the identifiers of distributed objects.

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::time::fmt_rat;

/// A ground Orc value.
///
/// Rationals are kept in lowest terms and integral rationals are always
/// represented as [`Const::Int`], so structural equality is numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Const {
    Signal,
    Bool(bool),
    Int(i64),
    Rat(Rational64),
    Str(String),
    Tuple(Vec<Const>),
    /// A site passed as a value, by name.
    SiteRef(String),
}

impl Const {
    /// Normalizing constructor for numbers.
    pub fn number(r: Rational64) -> Const {
        if r.is_integer() {
            Const::Int(*r.numer())
        } else {
            Const::Rat(r)
        }
    }

    pub fn str(s: impl Into<String>) -> Const {
        Const::Str(s.into())
    }

    pub fn as_rat(&self) -> Option<Rational64> {
        match self {
            Const::Int(i) => Some(Rational64::from_integer(*i)),
            Const::Rat(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Const::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Const::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Const]> {
        match self {
            Const::Tuple(v) => Some(v),
            _ => None,
        }
    }

    /// The value published by `let` over these arguments: signal for none,
    /// the bare value for one, a tuple otherwise.
    pub fn from_args(mut args: Vec<Const>) -> Const {
        match args.len() {
            0 => Const::Signal,
            1 => args.pop().expect("one element"),
            _ => Const::Tuple(args),
        }
    }

    /// Tuple projection. Non-tuples behave as 1-tuples.
    pub fn project(&self, index: usize) -> Option<Const> {
        match self {
            Const::Tuple(v) => v.get(index).cloned(),
            other if index == 0 => Some(other.clone()),
            _ => None,
        }
    }
}

pub(crate) fn escape_str(s: &str, out: &mut String) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Orc surface syntax for a constant (reparses as a literal parameter).
impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Signal => f.write_str("signal"),
            Const::Bool(b) => write!(f, "{b}"),
            Const::Int(i) => write!(f, "{i}"),
            Const::Rat(r) => f.write_str(&fmt_rat(r)),
            Const::Str(s) => {
                let mut out = String::new();
                escape_str(s, &mut out);
                f.write_str(&out)
            }
            Const::Tuple(v) => {
                f.write_str("(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                if v.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
            Const::SiteRef(name) => f.write_str(name),
        }
    }
}

/// A network location.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Loc {
    pub address: String,
    pub port: u16,
}

impl Loc {
    pub fn new(address: impl Into<String>, port: u16) -> Self {
        Loc { address: address.into(), port }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.address, self.port)
    }
}

/// Expression object identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EOid {
    pub loc: Loc,
    pub seq: u32,
}

impl EOid {
    pub fn new(loc: Loc, seq: u32) -> Self {
        EOid { loc, seq }
    }
}

impl fmt::Display for EOid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({},{})", self.loc, self.seq)
    }
}

/// Site identifier. Internal sites are known by name only.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiteId {
    Internal(String),
    External(Loc, u32),
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteId::Internal(n) => f.write_str(n),
            SiteId::External(loc, n) => write!(f, "s({loc},{n})"),
        }
    }
}

/// Correlates a site call with its return.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Handle {
    pub owner: EOid,
    pub id: u64,
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h({},{})", self.owner, self.id)
    }
}
