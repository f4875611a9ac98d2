//! Exhaustive search for violations of "no communication error implies every
//! bid item gets sold", straight over the model's successor relation. It
//! shares nothing with the graph explorer or the automaton-based checker:
//! states are keyed by a 128-bit hash of the full state and the property is
//! decided by plain reachability and cycle search.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use num_rational::Rational64;
use orc_auction::AuctionProps;
use orc_core::analysis::{Lasso, Ltl, NodeKind, Prop, TimedGraph};
use orc_core::sim::{GlobalSystem, SimModel};

#[derive(Clone, Copy, Debug)]
pub struct Label {
    pub error: bool,
    pub bid: bool,
    pub sold: bool,
}

pub struct Space {
    /// `(to, lost)`: target and whether the step dropped a message.
    pub succ: Vec<Vec<(usize, bool)>>,
    pub label: Vec<Label>,
}

fn key(s: &GlobalSystem) -> (u64, u64) {
    let mut a = DefaultHasher::new();
    s.hash(&mut a);
    let mut b = DefaultHasher::new();
    0xdead_beef_u64.hash(&mut b);
    s.hash(&mut b);
    (a.finish(), b.finish())
}

/// Every state reachable without passing `bound`. States with no successor,
/// or whose only successor passes the bound, repeat forever.
pub fn build(model: &SimModel, init: GlobalSystem, bound: Rational64, item: i64, cap: usize) -> Space {
    let root = model.initial(init).unwrap();
    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut space = Space { succ: Vec::new(), label: Vec::new() };
    let mut queue = VecDeque::new();
    let mut add = |s: GlobalSystem, space: &mut Space, queue: &mut VecDeque<(usize, GlobalSystem)>| -> usize {
        let k = key(&s);
        if let Some(&i) = ids.get(&k) {
            return i;
        }
        let i = space.label.len();
        assert!(i < cap, "state space larger than {cap}");
        ids.insert(k, i);
        space.label.push(Label {
            error: s.has_socket_error(),
            bid: AuctionProps::has_bid(&s, item),
            sold: AuctionProps::sold(&s, item),
        });
        space.succ.push(Vec::new());
        queue.push_back((i, s));
        i
    };
    add(root, &mut space, &mut queue);
    while let Some((i, s)) = queue.pop_front() {
        let mut out = Vec::new();
        for (t, tr) in model.successors(&s).unwrap() {
            if t.elapsed > bound {
                continue;
            }
            let lost = tr.rule == "exchange(inf)";
            out.push((add(t, &mut space, &mut queue), lost));
        }
        if out.is_empty() {
            out.push((i, false));
        }
        space.succ[i] = out;
    }
    space
}

impl Space {
    pub fn len(&self) -> usize {
        self.label.len()
    }

    fn reachable(&self, ok: impl Fn(usize) -> bool, edge: impl Fn(bool) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        if !ok(0) {
            return seen;
        }
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for &(v, lost) in &self.succ[u] {
                if !seen[v] && ok(v) && edge(lost) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// States of `inside` that start an infinite path staying inside:
    /// repeatedly drop states with no successor left.
    fn infinite(&self, inside: &[bool], edge: impl Fn(bool) -> bool) -> Vec<bool> {
        let mut alive = inside.to_vec();
        loop {
            let mut changed = false;
            for u in 0..self.len() {
                if alive[u] && !self.succ[u].iter().any(|&(v, lost)| alive[v] && edge(lost)) {
                    alive[u] = false;
                    changed = true;
                }
            }
            if !changed {
                return alive;
            }
        }
    }

    /// Whether some error-free run bids on the item and never sells it,
    /// optionally using only steps that lose no message.
    pub fn violated(&self, allow_loss: bool) -> bool {
        let edge = |lost: bool| allow_loss || !lost;
        let reach = self.reachable(|u| !self.label[u].error, edge);
        let unsold: Vec<bool> = self.label.iter().map(|l| !l.error && !l.sold).collect();
        let inf = self.infinite(&unsold, edge);
        (0..self.len()).any(|u| reach[u] && self.label[u].bid && inf[u])
    }
}

/// Checks a reported counterexample of the guarded commitment property: a
/// real path of the graph that never rests on the time bound, violates the
/// formula under `satisfies`, has no communication error and loses a message.
pub fn check_lossy_lasso(
    g: &TimedGraph,
    f: &Ltl,
    l: &Lasso,
    satisfies: fn(&TimedGraph, &Ltl, &Lasso) -> bool,
) -> Result<(), String> {
    if !l.is_path_in(g) {
        return Err("not a path of the graph".into());
    }
    if satisfies(g, f, l) {
        return Err("the lasso satisfies the formula".into());
    }
    if l.nodes.iter().any(|&v| g.nodes[v as usize].kind == NodeKind::Boundary) {
        return Err("the lasso rests on the time bound".into());
    }
    let err = g.atoms.iter().position(|a| *a == Prop::new("commError", vec![])).ok_or("no commError atom")?;
    if l.nodes.iter().any(|&v| g.nodes[v as usize].props >> err & 1 == 1) {
        return Err("the lasso has a communication error".into());
    }
    if !l.steps(g).iter().any(|s| s.rule == "exchange(inf)") {
        return Err("no message is lost".into());
    }
    Ok(())
}

/// The least elapsed time of any reachable state satisfying `goal`, by
/// visiting every state up to `bound`. Time never decreases along a run, so
/// states already satisfying `goal` or later than the best so far are not
/// expanded.
pub fn earliest(
    model: &SimModel,
    init: GlobalSystem,
    bound: Rational64,
    goal: impl Fn(&GlobalSystem) -> bool,
) -> (Option<Rational64>, usize) {
    let root = model.initial(init).unwrap();
    let mut seen = std::collections::HashSet::new();
    seen.insert(key(&root));
    let mut queue = VecDeque::from([root]);
    let mut best: Option<Rational64> = None;
    while let Some(s) = queue.pop_front() {
        if best.is_some_and(|b| s.elapsed >= b) {
            continue;
        }
        if goal(&s) {
            best = Some(s.elapsed);
            continue;
        }
        for (t, _) in model.successors(&s).unwrap() {
            if t.elapsed <= bound && seen.insert(key(&t)) {
                queue.push_back(t);
            }
        }
    }
    (best, seen.len())
}
