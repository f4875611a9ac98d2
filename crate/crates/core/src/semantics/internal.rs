//! Internal sites: fully predictable built-ins evaluated inside the
//! expression's own configuration.

use num_rational::Rational64;
use num_traits::Zero;

use crate::value::Const;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Response {
    /// Publishes at once.
    Immediate(Const),
    /// Publishes the value after the given delay (`rtimer`).
    After(Rational64, Const),
    /// Never publishes.
    SilentForever,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown internal site `{0}`")]
pub struct UnknownSite(pub String);

pub const INTERNAL_SITES: &[&str] = &[
    "if", "let", "clock", "rtimer", "add", "sub", "mul", "div", "min", "max", "eq", "neq", "leq", "lt", "geq", "gt",
    "not", "and", "or", "proj",
];

pub fn is_internal(name: &str) -> bool {
    INTERNAL_SITES.contains(&name)
}

fn nums(args: &[Const]) -> Option<(Rational64, Rational64)> {
    match args {
        [a, b] => Some((a.as_rat()?, b.as_rat()?)),
        _ => None,
    }
}

fn arith(args: &[Const], f: impl Fn(Rational64, Rational64) -> Option<Rational64>) -> Response {
    match nums(args).and_then(|(a, b)| f(a, b)) {
        Some(r) => Response::Immediate(Const::number(r)),
        None => Response::SilentForever,
    }
}

fn compare(args: &[Const], f: impl Fn(Rational64, Rational64) -> bool) -> Response {
    match nums(args) {
        Some((a, b)) => Response::Immediate(Const::Bool(f(a, b))),
        None => Response::SilentForever,
    }
}

fn bools(args: &[Const], f: impl Fn(bool, bool) -> bool) -> Response {
    match args {
        [Const::Bool(a), Const::Bool(b)] => Response::Immediate(Const::Bool(f(*a, *b))),
        _ => Response::SilentForever,
    }
}

/// Evaluates an internal site. Pure in `(name, args, now)`. Ill-typed
/// arguments make the call silent.
pub fn eval_internal_site(name: &str, args: &[Const], now: &Rational64) -> Result<Response, UnknownSite> {
    use Response::*;
    let r = match name {
        "if" => match args {
            [Const::Bool(true)] => Immediate(Const::Signal),
            _ => SilentForever,
        },
        "let" => Immediate(Const::from_args(args.to_vec())),
        "clock" => Immediate(Const::number(*now)),
        "rtimer" => match args {
            [t] => match t.as_rat() {
                Some(t) if t >= Rational64::zero() => After(t, Const::Signal),
                _ => SilentForever,
            },
            _ => SilentForever,
        },
        "add" => arith(args, |a, b| Some(a + b)),
        "sub" => arith(args, |a, b| Some(a - b)),
        "mul" => arith(args, |a, b| Some(a * b)),
        "div" => arith(args, |a, b| if b.is_zero() { None } else { Some(a / b) }),
        "min" => arith(args, |a, b| Some(a.min(b))),
        "max" => arith(args, |a, b| Some(a.max(b))),
        "eq" => match args {
            [a, b] => Immediate(Const::Bool(a == b)),
            _ => SilentForever,
        },
        "neq" => match args {
            [a, b] => Immediate(Const::Bool(a != b)),
            _ => SilentForever,
        },
        "leq" => compare(args, |a, b| a <= b),
        "lt" => compare(args, |a, b| a < b),
        "geq" => compare(args, |a, b| a >= b),
        "gt" => compare(args, |a, b| a > b),
        "not" => match args {
            [Const::Bool(b)] => Immediate(Const::Bool(!b)),
            _ => SilentForever,
        },
        "and" => bools(args, |a, b| a && b),
        "or" => bools(args, |a, b| a || b),
        "proj" => match args {
            [Const::Int(i), t] if *i >= 0 => match t.project(*i as usize) {
                Some(c) => Immediate(c),
                None => SilentForever,
            },
            _ => SilentForever,
        },
        other => return Err(UnknownSite(other.to_string())),
    };
    Ok(r)
}
