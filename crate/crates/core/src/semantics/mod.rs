//! Object-based timed semantics.
//!
//! An expression object rewrites its runtime term one step at a time, in
//! leftmost-innermost order. Site calls leave a pending leaf and emit a call
//! message; the matching return turns the leaf into a publisher. Internal
//! sites are evaluated in place. A [`LocalConfig`] gives expression steps
//! priority over every interaction with the environment, and only lets time
//! pass through [`crate::time::Timed`].

mod config;
mod internal;
mod site;
mod term;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Deref;

pub use config::{env_of, Event, ExprObject, LocalConfig, LocalMove, Msg, Timer};
pub use internal::{eval_internal_site, is_internal, Response, UnknownSite, INTERNAL_SITES};
pub use site::{ReplyTo, SiteBehavior, SiteObject, SiteOutcome, SiteReply};
pub use term::{Action, Directory, Env, Head, Path, StepCx, Template, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemError {
    #[error("Zeno suspicion: {fuel} instantaneous steps without quiescence, busiest expression object {expr}")]
    Zeno { expr: String, fuel: usize },
    #[error("malformed runtime expression: {0}")]
    Malformed(String),
}

/// Shared immutable context carried along with a state but excluded from
/// its identity: all `Ambient` values compare equal and hash to nothing.
#[derive(Clone, Default)]
pub struct Ambient<T>(pub T);

impl<T> PartialEq for Ambient<T> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl<T> Eq for Ambient<T> {}

impl<T> Hash for Ambient<T> {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl<T> Deref for Ambient<T> {
    type Target = T;

    fn deref(&self) -> &T {
        &self.0
    }
}

impl<T> fmt::Debug for Ambient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("..")
    }
}
