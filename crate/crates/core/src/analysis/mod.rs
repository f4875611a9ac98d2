//! Time-bounded LTL model checking and earliest-time reachability over the
//! simulation model.
//!
//! [`explore`] builds the state graph reachable within a time bound,
//! recording for each state which of the formula's propositions hold.
//! [`mc`] checks a formula on that graph by the automata-theoretic method:
//! the negated formula becomes a generalized Büchi automaton, and a
//! counterexample is an accepting lasso in the product. States whose next
//! tick would cross the bound, and states with no successor, are completed
//! with self-loops so that every path is infinite.

mod buchi;
mod earliest;
mod explore;
mod ltl;
mod mc;

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;

pub use buchi::{Buchi, BuchiState, MAX_ATOMS};
pub use earliest::{find_earliest, Earliest};
pub use explore::{explore, fingerprint, prop_mask, Edge, ExploreOptions, Fingerprint, Node, NodeKind, TimedGraph};
pub use ltl::{parse_ltl, Definition, Definitions, Ltl, LtlParseError, Prop};
pub use mc::{check_graph, Lasso, Step, Verdict};

use crate::semantics::SemError;
use crate::sim::{GlobalSystem, SimModel};
use crate::Time;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error("more than {0} states; raise the node cap or lower the bound")]
    NodeCap(usize),
    #[error("an unbounded search needs a node cap")]
    Unbounded,
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("{0} propositions exceed the limit of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("`{0}` is not a state predicate")]
    NotPropositional(String),
    #[error(transparent)]
    Parse(#[from] LtlParseError),
}

/// Interprets atomic propositions on states.
pub trait PropSet: Send + Sync {
    /// `None` when the proposition is not declared.
    fn eval(&self, p: &Prop, s: &GlobalSystem) -> Option<bool>;
}

impl<T: PropSet + ?Sized> PropSet for Arc<T> {
    fn eval(&self, p: &Prop, s: &GlobalSystem) -> Option<bool> {
        (**self).eval(p, s)
    }
}

/// Propositions meaningful for any system.
#[derive(Clone, Copy, Debug, Default)]
pub struct BasicProps;

impl PropSet for BasicProps {
    fn eval(&self, p: &Prop, s: &GlobalSystem) -> Option<bool> {
        match (p.name.as_str(), p.args.as_slice()) {
            ("commError", []) => Some(s.has_socket_error()),
            _ => None,
        }
    }
}

/// Explores the graph for `f`'s propositions and checks `f` on it.
pub fn mc(
    model: &SimModel,
    init: GlobalSystem,
    f: &Ltl,
    props: &dyn PropSet,
    opts: &ExploreOptions,
) -> Result<(Verdict, TimedGraph), AnalysisError> {
    let g = explore(model, init, &f.atoms(), props, opts)?;
    let v = check_graph(&g, f);
    Ok((v, g))
}

/// Whether `f` has a counterexample on `g` that never rests on the time
/// bound: boundary nodes are dead ends instead of looping. Such a lasso is
/// a path of every graph explored to a larger bound, since nodes below the
/// bound keep their successors.
pub fn bound_free_counterexample(g: &TimedGraph, f: &Ltl) -> Option<Lasso> {
    let mut cut = g.clone();
    for n in &mut cut.nodes {
        if n.kind == NodeKind::Boundary {
            n.kind = NodeKind::Normal;
        }
    }
    match check_graph(&cut, f) {
        Verdict::CounterExample(l) => Some(l),
        Verdict::Holds => None,
    }
}

/// [`mc`] by iterative deepening: explores to `step`, `2 step`, ... below
/// `opts.bound`, stopping at the first bound-free counterexample, and
/// decides at the full bound otherwise. The returned graph is the one the
/// verdict was found on.
pub fn mc_deepening(
    model: &SimModel,
    init: GlobalSystem,
    f: &Ltl,
    props: &dyn PropSet,
    opts: &ExploreOptions,
    step: Rational64,
) -> Result<(Verdict, TimedGraph), AnalysisError> {
    let mut b = step;
    while step > Rational64::zero() && Time::from(b).lt_time(&opts.bound) {
        let o = ExploreOptions { bound: Time::from(b), ..opts.clone() };
        let g = explore(model, init.clone(), &f.atoms(), props, &o)?;
        if let Some(l) = bound_free_counterexample(&g, f) {
            return Ok((Verdict::CounterExample(l), g));
        }
        b += step;
    }
    mc(model, init, f, props, opts)
}

/// Earliest state satisfying the propositional formula `p`.
pub fn find_earliest_prop(
    model: &SimModel,
    init: GlobalSystem,
    p: &Ltl,
    props: &dyn PropSet,
    bound: &Time,
    node_cap: usize,
) -> Result<Earliest, AnalysisError> {
    if !p.is_propositional() {
        return Err(AnalysisError::NotPropositional(p.to_string()));
    }
    let atoms = p.atoms();
    // reject undeclared propositions up front
    let probe = model.initial(init.clone())?;
    prop_mask(&atoms, props, &probe)?;
    let goal = |s: &GlobalSystem| p.eval_state(&mut |a: &Prop| props.eval(a, s).unwrap_or(false));
    find_earliest(model, init, &goal, bound, node_cap)
}
