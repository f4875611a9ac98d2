//! Orc orchestration language: parser, timed object-based semantics, an
//! abstract socket-level simulation model of distributed deployments, and
//! time-bounded LTL model checking / earliest-time search over it.

pub mod analysis;
pub mod lang;
pub mod semantics;
pub mod sim;
pub mod time;
pub mod value;

use num_rational::Rational64;

/// Exact rational time with infinity, used throughout the engine.
pub type Time = time::TimeInf<Rational64>;
/// Floating-point time, for quick experiments with the time algebra.
pub type TimeF64 = time::TimeInf<f64>;
/// Exact rational scalar.
pub type Rat = Rational64;

pub use time::{TimeInf, TimeScalar};
pub use value::{Const, EOid, Handle, Loc, SiteId};
