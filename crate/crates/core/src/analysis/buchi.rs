//! Translation of LTL into generalized Büchi automata by tableau expansion
//! (Gerth, Peled, Vardi and Wolper).
//!
//! Automaton states carry literal constraints over proposition indices and
//! are read against graph states: a run visits `q` at a graph state only if
//! that state satisfies `q`'s literals.

use std::collections::{BTreeSet, HashMap};

use super::ltl::{Ltl, Prop};

type Id = usize;

/// Negation normal form, hash-consed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(Id, Id),
    Or(Id, Id),
    Until(Id, Id),
    Release(Id, Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    index: HashMap<Nnf, Id>,
}

impl Arena {
    fn mk(&mut self, n: Nnf) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    /// NNF of `f` (negated when `neg`), with atoms numbered by `atoms`.
    fn nnf(&mut self, f: &Ltl, neg: bool, atoms: &[Prop]) -> Id {
        let n = match (f, neg) {
            (Ltl::True, false) | (Ltl::False, true) => Nnf::True,
            (Ltl::True, true) | (Ltl::False, false) => Nnf::False,
            (Ltl::Prop(p), _) => {
                let i = atoms.iter().position(|a| a == p).expect("atom table covers the formula");
                Nnf::Lit(i, !neg)
            }
            (Ltl::Not(a), _) => return self.nnf(a, !neg, atoms),
            (Ltl::And(a, b), false) | (Ltl::Or(a, b), true) => {
                Nnf::And(self.nnf(a, neg, atoms), self.nnf(b, neg, atoms))
            }
            (Ltl::Or(a, b), false) | (Ltl::And(a, b), true) => {
                Nnf::Or(self.nnf(a, neg, atoms), self.nnf(b, neg, atoms))
            }
            (Ltl::Implies(a, b), false) => Nnf::Or(self.nnf(a, true, atoms), self.nnf(b, false, atoms)),
            (Ltl::Implies(a, b), true) => Nnf::And(self.nnf(a, false, atoms), self.nnf(b, true, atoms)),
            // [] a = false R a ;  <> a = true U a
            (Ltl::Always(a), false) | (Ltl::Eventually(a), true) => {
                let f = self.mk(Nnf::False);
                Nnf::Release(f, self.nnf(a, neg, atoms))
            }
            (Ltl::Eventually(a), false) | (Ltl::Always(a), true) => {
                let t = self.mk(Nnf::True);
                Nnf::Until(t, self.nnf(a, neg, atoms))
            }
            (Ltl::Until(a, b), false) => Nnf::Until(self.nnf(a, false, atoms), self.nnf(b, false, atoms)),
            (Ltl::Until(a, b), true) => Nnf::Release(self.nnf(a, true, atoms), self.nnf(b, true, atoms)),
        };
        self.mk(n)
    }
}

/// One automaton state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuchiState {
    /// Propositions that must hold.
    pub pos: u64,
    /// Propositions that must not hold.
    pub neg: u64,
    pub initial: bool,
    pub succ: Vec<usize>,
}

impl BuchiState {
    /// Whether a graph state with proposition bitmask `props` matches.
    pub fn admits(&self, props: u64) -> bool {
        props & self.pos == self.pos && props & self.neg == 0
    }
}

/// A generalized Büchi automaton: an accepting run visits every set in
/// `accepting` infinitely often. No sets means every infinite run accepts.
#[derive(Clone, Debug)]
pub struct Buchi {
    pub states: Vec<BuchiState>,
    pub accepting: Vec<Vec<bool>>,
}

const INIT: usize = usize::MAX;

struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Id>,
    old: BTreeSet<Id>,
    next: BTreeSet<Id>,
}

struct Done {
    incoming: BTreeSet<usize>,
    old: BTreeSet<Id>,
    next: BTreeSet<Id>,
}

/// Maximum number of propositions a formula may mention.
pub const MAX_ATOMS: usize = 64;

impl Buchi {
    /// The automaton accepting exactly the words satisfying `f`; `atoms`
    /// fixes the proposition numbering and must cover `f`.
    pub fn from_ltl(f: &Ltl, atoms: &[Prop]) -> Buchi {
        assert!(atoms.len() <= MAX_ATOMS, "at most {MAX_ATOMS} propositions per formula");
        let mut arena = Arena::default();
        let root = arena.nnf(f, false, atoms);
        let mut done: Vec<Done> = Vec::new();
        let mut stack =
            vec![Node { incoming: [INIT].into(), new: [root].into(), old: BTreeSet::new(), next: BTreeSet::new() }];
        while let Some(mut node) = stack.pop() {
            let Some(&eta) = node.new.iter().next() else {
                if let Some(d) = done.iter_mut().find(|d| d.old == node.old && d.next == node.next) {
                    d.incoming.extend(node.incoming);
                } else {
                    let id = done.len();
                    let next = node.next.clone();
                    done.push(Done { incoming: node.incoming, old: node.old, next: node.next });
                    stack.push(Node { incoming: [id].into(), new: next, old: BTreeSet::new(), next: BTreeSet::new() });
                }
                continue;
            };
            node.new.remove(&eta);
            if node.old.contains(&eta) {
                stack.push(node);
                continue;
            }
            let fresh =
                |node: &Node, ids: &[Id]| ids.iter().copied().filter(|i| !node.old.contains(i)).collect::<Vec<_>>();
            match arena.nodes[eta].clone() {
                Nnf::False => {}
                Nnf::True => {
                    node.old.insert(eta);
                    stack.push(node);
                }
                Nnf::Lit(a, pos) => {
                    let contra = arena.index.get(&Nnf::Lit(a, !pos)).is_some_and(|c| node.old.contains(c));
                    if !contra {
                        node.old.insert(eta);
                        stack.push(node);
                    }
                }
                Nnf::And(a, b) => {
                    let add = fresh(&node, &[a, b]);
                    node.new.extend(add);
                    node.old.insert(eta);
                    stack.push(node);
                }
                Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                    let (new1, next1, new2) = match arena.nodes[eta] {
                        Nnf::Or(..) => (vec![a], false, vec![b]),
                        Nnf::Until(..) => (vec![a], true, vec![b]),
                        _ => (vec![b], true, vec![a, b]),
                    };
                    let mut n1 = Node {
                        incoming: node.incoming.clone(),
                        new: node.new.clone(),
                        old: node.old.clone(),
                        next: node.next.clone(),
                    };
                    n1.new.extend(fresh(&node, &new1));
                    if next1 {
                        n1.next.insert(eta);
                    }
                    n1.old.insert(eta);
                    let mut n2 = node;
                    let add = fresh(&n2, &new2);
                    n2.new.extend(add);
                    n2.old.insert(eta);
                    // explore the first alternative first
                    stack.push(n2);
                    stack.push(n1);
                }
            }
        }

        let mut states: Vec<BuchiState> = done
            .iter()
            .map(|d| {
                let (mut pos, mut neg) = (0u64, 0u64);
                for &i in &d.old {
                    if let Nnf::Lit(a, p) = arena.nodes[i] {
                        if p {
                            pos |= 1 << a;
                        } else {
                            neg |= 1 << a;
                        }
                    }
                }
                BuchiState { pos, neg, initial: d.incoming.contains(&INIT), succ: Vec::new() }
            })
            .collect();
        for (j, d) in done.iter().enumerate() {
            for &i in &d.incoming {
                if i != INIT {
                    states[i].succ.push(j);
                }
            }
        }
        for s in &mut states {
            s.succ.sort_unstable();
            s.succ.dedup();
        }
        let accepting = arena
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(u, n)| match n {
                Nnf::Until(_, b) => Some(done.iter().map(|d| !d.old.contains(&u) || d.old.contains(b)).collect()),
                _ => None,
            })
            .collect();
        Buchi { states, accepting }
    }

    pub fn is_accepting(&self, set: usize, q: usize) -> bool {
        self.accepting[set][q]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ltl::parse_ltl;

    /// Whether the automaton accepts the ultimately periodic word
    /// `prefix (cycle)^ω`, by brute force over (state, position) pairs.
    fn accepts(b: &Buchi, prefix: &[u64], cycle: &[u64]) -> bool {
        let word: Vec<u64> = prefix.iter().chain(cycle).copied().collect();
        let n = word.len();
        let next_pos = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
        let nodes: Vec<(usize, usize)> = (0..b.states.len())
            .flat_map(|q| (0..n).map(move |i| (q, i)))
            .filter(|&(q, i)| b.states[q].admits(word[i]))
            .collect();
        let succ = |&(q, i): &(usize, usize)| -> Vec<(usize, usize)> {
            let j = next_pos(i);
            b.states[q].succ.iter().filter(|&&q2| b.states[q2].admits(word[j])).map(|&q2| (q2, j)).collect()
        };
        let reach = |from: Vec<(usize, usize)>| {
            let mut seen: BTreeSet<(usize, usize)> = from.iter().copied().collect();
            let mut work = from;
            while let Some(x) = work.pop() {
                for y in succ(&x) {
                    if seen.insert(y) {
                        work.push(y);
                    }
                }
            }
            seen
        };
        let init: Vec<_> = nodes.iter().copied().filter(|&(q, i)| i == 0 && b.states[q].initial).collect();
        let reachable = reach(init);
        // an accepting lasso: some reachable node on a cycle whose SCC meets every set
        reachable.iter().any(|&x| {
            let fwd = reach(succ(&x));
            if !fwd.contains(&x) {
                return false;
            }
            let scc: Vec<_> = fwd.iter().copied().filter(|y| reach(succ(y)).contains(&x)).collect();
            (0..b.accepting.len()).all(|k| scc.iter().any(|&(q, i)| i >= prefix.len() && b.accepting[k][q]))
        })
    }

    fn atoms(names: &[&str]) -> Vec<Prop> {
        names.iter().map(|n| Prop::new(*n, vec![])).collect()
    }

    /// Direct LTL semantics on a lasso word.
    fn holds(f: &Ltl, at: &[Prop], prefix: &[u64], cycle: &[u64], i: usize) -> bool {
        let n = prefix.len() + cycle.len();
        let letter = |i: usize| if i < prefix.len() { prefix[i] } else { cycle[i - prefix.len()] };
        // positions reachable from i, in order, covering one full cycle
        let horizon = |i: usize| {
            let mut v = vec![i];
            let mut j = i;
            for _ in 0..n {
                j = if j + 1 < n { j + 1 } else { prefix.len() };
                v.push(j);
            }
            v
        };
        match f {
            Ltl::True => true,
            Ltl::False => false,
            Ltl::Prop(p) => letter(i) >> at.iter().position(|a| a == p).unwrap() & 1 == 1,
            Ltl::Not(a) => !holds(a, at, prefix, cycle, i),
            Ltl::And(a, b) => holds(a, at, prefix, cycle, i) && holds(b, at, prefix, cycle, i),
            Ltl::Or(a, b) => holds(a, at, prefix, cycle, i) || holds(b, at, prefix, cycle, i),
            Ltl::Implies(a, b) => !holds(a, at, prefix, cycle, i) || holds(b, at, prefix, cycle, i),
            Ltl::Always(a) => horizon(i).into_iter().all(|j| holds(a, at, prefix, cycle, j)),
            Ltl::Eventually(a) => horizon(i).into_iter().any(|j| holds(a, at, prefix, cycle, j)),
            Ltl::Until(a, b) => {
                for j in horizon(i) {
                    if holds(b, at, prefix, cycle, j) {
                        return true;
                    }
                    if !holds(a, at, prefix, cycle, j) {
                        return false;
                    }
                }
                false
            }
        }
    }

    #[test]
    fn automata_agree_with_direct_semantics_on_small_lassos() {
        let at = atoms(&["a", "b"]);
        let formulas = [
            "a",
            "~ a",
            "[] a",
            "<> a",
            "a U b",
            "~ (a U b)",
            "[] <> a",
            "<> [] a",
            "[] (a -> <> b)",
            "([] ~ a) -> [] (b -> <> a)",
            "(a U b) U a",
            "~ ([] <> a -> [] <> b)",
            "true",
            "false",
            "a /\\ ~ a",
        ];
        let letters = [0u64, 1, 2, 3];
        let mut words = Vec::new();
        for &p0 in &letters {
            for &c0 in &letters {
                words.push((vec![p0], vec![c0]));
                for &c1 in &letters {
                    words.push((vec![p0], vec![c0, c1]));
                    words.push((vec![], vec![p0, c0, c1]));
                }
            }
        }
        for src in formulas {
            let f = parse_ltl(src).unwrap();
            let b = Buchi::from_ltl(&f, &at);
            for (prefix, cycle) in &words {
                assert_eq!(
                    accepts(&b, prefix, cycle),
                    holds(&f, &at, prefix, cycle, 0),
                    "{src} on {prefix:?} ({cycle:?})^w"
                );
            }
        }
    }

    #[test]
    fn until_contributes_one_acceptance_set() {
        let at = atoms(&["a", "b"]);
        let b = Buchi::from_ltl(&parse_ltl("a U b").unwrap(), &at);
        assert_eq!(b.accepting.len(), 1);
        assert!(Buchi::from_ltl(&parse_ltl("[] a").unwrap(), &at).accepting.is_empty());
    }
}
