//! Time domain: nonnegative time extended with infinity, plus the
//! time-elapse (`delta`) and maximum-time-elapse (`mte`) machinery shared by
//! the runtime and the simulation model.
//!
//! [`TimeInf`] is generic over its scalar so the algebra can be exercised on
//! exact rationals (the default, see [`crate::Time`]) as well as on floats
//! or integers. Everything that ends up in an explored state space uses the
//! exact rational alias.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Scalar usable as a time value.
pub trait TimeScalar: Clone + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> + fmt::Debug {}

impl<T> TimeScalar for T where T: Clone + PartialOrd + Zero + Add<Output = T> + Sub<Output = T> + fmt::Debug {}

/// Time with infinity. Finite values are never negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeInf<T> {
    Finite(T),
    Infinity,
}

impl<T: TimeScalar> TimeInf<T> {
    pub fn zero() -> Self {
        TimeInf::Finite(T::zero())
    }

    /// Builds a finite time, rejecting negative values.
    pub fn finite(t: T) -> Option<Self> {
        if t < T::zero() {
            None
        } else {
            Some(TimeInf::Finite(t))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TimeInf::Finite(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TimeInf::Finite(t) if t.is_zero())
    }

    pub fn as_finite(&self) -> Option<&T> {
        match self {
            TimeInf::Finite(t) => Some(t),
            TimeInf::Infinity => None,
        }
    }

    /// Addition; infinity absorbs.
    pub fn plus(&self, other: &Self) -> Self {
        match (self, other) {
            (TimeInf::Finite(a), TimeInf::Finite(b)) => TimeInf::Finite(a.clone() + b.clone()),
            _ => TimeInf::Infinity,
        }
    }

    /// Truncated subtraction of a finite amount: `max(self - r, 0)`.
    pub fn monus(&self, r: &T) -> Self {
        match self {
            TimeInf::Infinity => TimeInf::Infinity,
            TimeInf::Finite(a) => {
                if a <= r {
                    TimeInf::zero()
                } else {
                    TimeInf::Finite(a.clone() - r.clone())
                }
            }
        }
    }

    pub fn min_of(self, other: Self) -> Self {
        if other.lt_time(&self) {
            other
        } else {
            self
        }
    }

    /// Strict ordering that works for partially ordered scalars (floats).
    pub fn lt_time(&self, other: &Self) -> bool {
        match (self, other) {
            (TimeInf::Finite(a), TimeInf::Finite(b)) => a < b,
            (TimeInf::Finite(_), TimeInf::Infinity) => true,
            _ => false,
        }
    }

    pub fn le_time(&self, other: &Self) -> bool {
        !other.lt_time(self)
    }
}

impl<T: TimeScalar> PartialOrd for TimeInf<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (TimeInf::Finite(a), TimeInf::Finite(b)) => a.partial_cmp(b),
            (TimeInf::Finite(_), TimeInf::Infinity) => Some(Ordering::Less),
            (TimeInf::Infinity, TimeInf::Finite(_)) => Some(Ordering::Greater),
            (TimeInf::Infinity, TimeInf::Infinity) => Some(Ordering::Equal),
        }
    }
}

impl<T: TimeScalar + Ord> Ord for TimeInf<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("total scalar order")
    }
}

impl<T: TimeScalar> From<T> for TimeInf<T> {
    fn from(t: T) -> Self {
        TimeInf::Finite(t)
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rat(r: &Rational64) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `0.25`.
pub fn parse_rat(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 12 {
            return None;
        }
        let neg = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().ok()?;
        let mag = Rational64::from_integer(int.abs()) + Rational64::new(f, den);
        return Some(if neg { -mag } else { mag });
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}

impl fmt::Display for TimeInf<Rational64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeInf::Finite(r) => f.write_str(&fmt_rat(r)),
            TimeInf::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid time literal `{0}`")]
pub struct TimeParseError(pub String);

impl FromStr for TimeInf<Rational64> {
    type Err = TimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "Inf" | "INF" | "Infinity" | "infinity" | "∞") {
            return Ok(TimeInf::Infinity);
        }
        parse_rat(t).filter(|r| !r.is_negative()).map(TimeInf::Finite).ok_or_else(|| TimeParseError(s.to_string()))
    }
}

/// A node-local logical clock.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clock {
    pub now: Rational64,
}

impl Clock {
    pub fn new(now: Rational64) -> Self {
        Clock { now }
    }

    pub fn advance(&mut self, r: &Rational64) {
        self.now += r;
    }
}

impl Default for Clock {
    fn default() -> Self {
        Clock::new(Rational64::zero())
    }
}

/// Anything time can elapse over.
///
/// `delta` advances clocks by `r` and decrements every pending delay by `r`
/// (truncated at zero). `mte` is the largest `r` that does not skip past a
/// pending event: the minimum pending delay, or infinity.
pub trait Timed {
    fn delta(&mut self, r: &Rational64);
    fn mte(&self) -> crate::Time;
}

impl<T: Timed> Timed for Vec<T> {
    fn delta(&mut self, r: &Rational64) {
        for x in self.iter_mut() {
            x.delta(r);
        }
    }

    fn mte(&self) -> crate::Time {
        self.iter().map(Timed::mte).fold(TimeInf::Infinity, TimeInf::min_of)
    }
}
