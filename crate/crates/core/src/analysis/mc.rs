use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::Rational64;

use super::buchi::Buchi;
use super::explore::TimedGraph;
use super::ltl::Ltl;

/// A path that ends in a cycle: `nodes[loop_start..]` repeats forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub nodes: Vec<u32>,
    pub loop_start: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    CounterExample(Lasso),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// One step of a reported trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub node: u32,
    pub time: Rational64,
    /// The rule that led here; `init` for the first step.
    pub rule: String,
}

impl Lasso {
    pub fn steps(&self, g: &TimedGraph) -> Vec<Step> {
        let mut out = Vec::with_capacity(self.nodes.len() + 1);
        let mut prev: Option<u32> = None;
        for &v in self.nodes.iter().chain(std::iter::once(&self.nodes[self.loop_start])) {
            let rule = match prev {
                None => "init".to_string(),
                Some(p) => g.edge_rule(p, v).to_string(),
            };
            out.push(Step { node: v, time: g.nodes[v as usize].time, rule });
            prev = Some(v);
        }
        out
    }

    /// Whether every consecutive pair is an edge of the completed graph.
    pub fn is_path_in(&self, g: &TimedGraph) -> bool {
        let closing = std::iter::once((*self.nodes.last().unwrap(), self.nodes[self.loop_start]));
        self.nodes.first() == Some(&0)
            && self
                .nodes
                .windows(2)
                .map(|w| (w[0], w[1]))
                .chain(closing)
                .all(|(a, b)| g.completed_succ(a).any(|x| x == b))
    }
}

type PNode = (u32, u32);

struct Product<'a> {
    g: &'a TimedGraph,
    b: &'a Buchi,
}

impl Product<'_> {
    fn initial(&self) -> Vec<PNode> {
        let p0 = self.g.nodes[0].props;
        (0..self.b.states.len() as u32)
            .filter(|&q| self.b.states[q as usize].initial && self.b.states[q as usize].admits(p0))
            .map(|q| (0, q))
            .collect()
    }

    fn succ(&self, (v, q): PNode) -> Vec<PNode> {
        let mut out = Vec::new();
        for w in self.g.completed_succ(v) {
            let pw = self.g.nodes[w as usize].props;
            for &q2 in &self.b.states[q as usize].succ {
                if self.b.states[q2].admits(pw) {
                    out.push((w, q2 as u32));
                }
            }
        }
        out
    }

    fn accepting(&self, k: usize, (_, q): PNode) -> bool {
        self.b.is_accepting(k, q as usize)
    }
}

/// Checks `f` on every infinite path of the graph completed with self-loops
/// on boundary and terminal nodes.
pub fn check_graph(g: &TimedGraph, f: &Ltl) -> Verdict {
    let neg = Ltl::not(f.clone());
    let b = Buchi::from_ltl(&neg, &g.atoms);
    let prod = Product { g, b: &b };
    match find_accepting_scc(&prod) {
        None => Verdict::Holds,
        Some(scc) => Verdict::CounterExample(lasso(&prod, &scc)),
    }
}

/// Iterative Tarjan over the reachable product; stops at the first
/// nontrivial SCC meeting every acceptance set.
fn find_accepting_scc(p: &Product) -> Option<HashSet<PNode>> {
    let mut index: HashMap<PNode, u32> = HashMap::new();
    let mut low: Vec<u32> = Vec::new();
    let mut on_stack: Vec<bool> = Vec::new();
    let mut nodes: Vec<PNode> = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    // (node, successors, next successor)
    let mut calls: Vec<(u32, Vec<PNode>, usize)> = Vec::new();

    for root in p.initial() {
        if index.contains_key(&root) {
            continue;
        }
        let visit = |x: PNode,
                     index: &mut HashMap<PNode, u32>,
                     low: &mut Vec<u32>,
                     on_stack: &mut Vec<bool>,
                     nodes: &mut Vec<PNode>,
                     stack: &mut Vec<u32>| {
            let i = nodes.len() as u32;
            index.insert(x, i);
            low.push(i);
            on_stack.push(true);
            nodes.push(x);
            stack.push(i);
            (i, p.succ(x), 0usize)
        };
        calls.push(visit(root, &mut index, &mut low, &mut on_stack, &mut nodes, &mut stack));
        while let Some(frame) = calls.last_mut() {
            let i = frame.0;
            if frame.2 < frame.1.len() {
                let y = frame.1[frame.2];
                frame.2 += 1;
                match index.get(&y) {
                    None => {
                        let f = visit(y, &mut index, &mut low, &mut on_stack, &mut nodes, &mut stack);
                        calls.push(f);
                    }
                    Some(&j) => {
                        if on_stack[j as usize] {
                            low[i as usize] = low[i as usize].min(j);
                        }
                    }
                }
                continue;
            }
            let (i, succ, _) = calls.pop().expect("frame exists");
            if let Some(parent) = calls.last() {
                let pi = parent.0 as usize;
                low[pi] = low[pi].min(low[i as usize]);
            }
            if low[i as usize] != i {
                continue;
            }
            let mut members = Vec::new();
            loop {
                let j = stack.pop().expect("root is on the stack");
                on_stack[j as usize] = false;
                members.push(nodes[j as usize]);
                if j == i {
                    break;
                }
            }
            let nontrivial = members.len() > 1 || succ.contains(&nodes[i as usize]);
            if nontrivial && (0..p.b.accepting.len()).all(|k| members.iter().any(|&x| p.accepting(k, x))) {
                return Some(members.into_iter().collect());
            }
        }
    }
    None
}

/// Shortest path from any of `from` to a node satisfying `goal`, moving
/// only through `allowed`. With `step` the path takes at least one edge and
/// excludes the start; otherwise it includes the start.
fn bfs(
    p: &Product,
    from: &[PNode],
    step: bool,
    allowed: &dyn Fn(PNode) -> bool,
    goal: &dyn Fn(PNode) -> bool,
) -> Option<Vec<PNode>> {
    // None marks the first node of a path
    let mut parent: HashMap<PNode, Option<PNode>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &x in from {
        let firsts = if step { p.succ(x).into_iter().filter(|&y| allowed(y)).collect() } else { vec![x] };
        for y in firsts {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(y) {
                e.insert(None);
                queue.push_back(y);
            }
        }
    }
    while let Some(x) = queue.pop_front() {
        if goal(x) {
            let mut path = vec![x];
            let mut cur = x;
            while let Some(Some(prev)) = parent.get(&cur) {
                path.push(*prev);
                cur = *prev;
            }
            path.reverse();
            return Some(path);
        }
        for y in p.succ(x) {
            if allowed(y) && !parent.contains_key(&y) {
                parent.insert(y, Some(x));
                queue.push_back(y);
            }
        }
    }
    None
}

fn lasso(p: &Product, scc: &HashSet<PNode>) -> Lasso {
    let any = |_: PNode| true;
    let in_scc = |x: PNode| scc.contains(&x);
    let prefix = bfs(p, &p.initial(), false, &any, &in_scc).expect("the SCC is reachable");
    let entry = *prefix.last().expect("nonempty");
    let mut cycle: Vec<PNode> = Vec::new();
    let mut cur = entry;
    for k in 0..p.b.accepting.len() {
        if p.accepting(k, cur) {
            continue;
        }
        let seg = bfs(p, &[cur], true, &in_scc, &|x| p.accepting(k, x)).expect("the SCC meets every set");
        cur = *seg.last().expect("nonempty");
        cycle.extend(seg);
    }
    if cur != entry || cycle.is_empty() {
        let seg = bfs(p, &[cur], true, &in_scc, &|x| x == entry).expect("the SCC is strongly connected");
        cycle.extend(seg);
    }
    // cycle ends at entry; drop the repeat
    cycle.pop();
    let loop_start = prefix.len() - 1;
    let nodes = prefix.into_iter().chain(cycle).map(|(v, _)| v).collect();
    Lasso { nodes, loop_start }
}
