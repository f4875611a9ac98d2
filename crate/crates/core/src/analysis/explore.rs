use std::collections::HashMap;

use num_rational::Rational64;
use rayon::prelude::*;

use super::{AnalysisError, Prop, PropSet};
use crate::sim::{GlobalSystem, SimModel, Transition};
use crate::Time;

/// A 128-bit digest of a state, used as its identity.
pub type Fingerprint = u128;

pub fn fingerprint(s: &GlobalSystem) -> Fingerprint {
    s.fingerprint()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Normal,
    /// Its next tick would pass the time bound.
    Boundary,
    /// No successor at all: deadlock or quiescence.
    Terminal,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub to: u32,
    /// Index into [`TimedGraph::rules`].
    pub rule: u32,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub time: Rational64,
    /// Bit `i` is the truth of the graph's `i`-th atom.
    pub props: u64,
    pub kind: NodeKind,
    pub edges: Vec<Edge>,
    /// `(parent, k)`: this node was first reached as the `k`-th successor of `parent`.
    pub parent: Option<(u32, u32)>,
}

/// The reachable state graph within a time bound. States themselves are not
/// kept; [`TimedGraph::state`] rebuilds one by replaying from the root.
#[derive(Clone, Debug)]
pub struct TimedGraph {
    pub nodes: Vec<Node>,
    pub atoms: Vec<Prop>,
    pub rules: Vec<String>,
    pub bound: Time,
    pub root: GlobalSystem,
    pub model: SimModel,
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub bound: Time,
    /// Give up beyond this many states.
    pub node_cap: usize,
    /// Expand each BFS layer on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { bound: Time::Infinity, node_cap: 5_000_000, parallel: true }
    }
}

impl ExploreOptions {
    pub fn bounded(bound: Time) -> Self {
        ExploreOptions { bound, ..Default::default() }
    }
}

/// Evaluates the atoms on one state into a bitmask.
pub fn prop_mask(atoms: &[Prop], props: &dyn PropSet, s: &GlobalSystem) -> Result<u64, AnalysisError> {
    let mut m = 0;
    for (i, a) in atoms.iter().enumerate() {
        match props.eval(a, s) {
            Some(true) => m |= 1 << i,
            Some(false) => {}
            None => return Err(AnalysisError::UnknownProp(a.to_string())),
        }
    }
    Ok(m)
}

type Expansion = Result<Vec<(GlobalSystem, Transition, Fingerprint)>, AnalysisError>;

fn expand(model: &SimModel, s: &GlobalSystem) -> Expansion {
    Ok(model
        .successors(s)?
        .into_iter()
        .map(|(n, t)| {
            let fp = fingerprint(&n);
            (n, t, fp)
        })
        .collect())
}

/// Breadth-first exploration of every state reachable from `init` (closed
/// first) without passing the time bound.
pub fn explore(
    model: &SimModel,
    init: GlobalSystem,
    atoms: &[Prop],
    props: &dyn PropSet,
    opts: &ExploreOptions,
) -> Result<TimedGraph, AnalysisError> {
    if atoms.len() > super::buchi::MAX_ATOMS {
        return Err(AnalysisError::TooManyAtoms(atoms.len()));
    }
    if !opts.bound.is_finite() && opts.node_cap == usize::MAX {
        return Err(AnalysisError::Unbounded);
    }
    let root = model.initial(init)?;
    let mut g = TimedGraph {
        nodes: Vec::new(),
        atoms: atoms.to_vec(),
        rules: Vec::new(),
        bound: opts.bound.clone(),
        root: root.clone(),
        model: model.clone(),
    };
    let mut rule_ids: HashMap<String, u32> = HashMap::new();
    let mut seen: HashMap<Fingerprint, u32> = HashMap::new();
    seen.insert(fingerprint(&root), 0);
    g.nodes.push(Node {
        time: root.elapsed,
        props: prop_mask(atoms, props, &root)?,
        kind: NodeKind::Normal,
        edges: Vec::new(),
        parent: None,
    });
    let mut frontier: Vec<(u32, GlobalSystem)> = vec![(0, root)];
    while !frontier.is_empty() {
        let expansions: Vec<Expansion> = if opts.parallel && frontier.len() > 1 {
            frontier.par_iter().map(|(_, s)| expand(model, s)).collect()
        } else {
            frontier.iter().map(|(_, s)| expand(model, s)).collect()
        };
        let mut next = Vec::new();
        for ((id, _), succ) in frontier.into_iter().zip(expansions) {
            let succ = succ?;
            if succ.is_empty() {
                g.nodes[id as usize].kind = NodeKind::Terminal;
                continue;
            }
            for (k, (s, tr, fp)) in succ.into_iter().enumerate() {
                if !Time::from(s.elapsed).le_time(&opts.bound) {
                    // only ticks move time, and a tick is always the sole successor
                    g.nodes[id as usize].kind = NodeKind::Boundary;
                    continue;
                }
                let rule = match rule_ids.get(&tr.rule) {
                    Some(&r) => r,
                    None => {
                        let r = g.rules.len() as u32;
                        g.rules.push(tr.rule.clone());
                        rule_ids.insert(tr.rule, r);
                        r
                    }
                };
                let to = match seen.get(&fp) {
                    Some(&to) => to,
                    None => {
                        if g.nodes.len() >= opts.node_cap {
                            return Err(AnalysisError::NodeCap(opts.node_cap));
                        }
                        let to = g.nodes.len() as u32;
                        seen.insert(fp, to);
                        g.nodes.push(Node {
                            time: s.elapsed,
                            props: prop_mask(atoms, props, &s)?,
                            kind: NodeKind::Normal,
                            edges: Vec::new(),
                            parent: Some((id, k as u32)),
                        });
                        next.push((to, s));
                        to
                    }
                };
                g.nodes[id as usize].edges.push(Edge { to, rule });
            }
        }
        frontier = next;
    }
    Ok(g)
}

impl TimedGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    /// Successors for LTL purposes: boundary and terminal nodes loop on themselves.
    pub fn completed_succ(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        let n = &self.nodes[v as usize];
        let self_loop = (n.kind != NodeKind::Normal && n.edges.is_empty()).then_some(v);
        n.edges.iter().map(|e| e.to).chain(self_loop)
    }

    /// The BFS-tree path from the root to `v`.
    pub fn path_to(&self, v: u32) -> Vec<u32> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some((p, _)) = self.nodes[cur as usize].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Rebuilds the state of node `v` by replaying successor choices.
    pub fn state(&self, v: u32) -> Result<GlobalSystem, AnalysisError> {
        let path = self.path_to(v);
        let mut s = self.root.clone();
        for w in &path[1..] {
            let (_, k) = self.nodes[*w as usize].parent.expect("non-root has a parent");
            s = self.model.successors(&s)?.swap_remove(k as usize).0;
        }
        debug_assert_eq!(s.elapsed, self.nodes[v as usize].time);
        Ok(s)
    }

    /// Rule name of the edge `from -> to`, or the completion loop's label.
    pub fn edge_rule(&self, from: u32, to: u32) -> &str {
        let n = &self.nodes[from as usize];
        match n.edges.iter().find(|e| e.to == to) {
            Some(e) => &self.rules[e.rule as usize],
            None if from == to && n.kind == NodeKind::Boundary => "bound",
            None if from == to => "deadlock",
            None => "?",
        }
    }
}
