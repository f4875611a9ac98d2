//! Direct LTL semantics on ultimately periodic paths, and brute-force lasso
//! enumeration over small graphs.

use orc_core::analysis::{Lasso, Ltl, TimedGraph};

/// Truth of `f` at every position of the word `letters[0..] (letters[k..])^ω`,
/// where `holds(i, p)` says whether proposition `p` holds at position `i`.
pub fn eval_lasso(f: &Ltl, n: usize, k: usize, holds: &dyn Fn(usize, &orc_core::analysis::Prop) -> bool) -> Vec<bool> {
    let next = |i: usize| if i + 1 < n { i + 1 } else { k };
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Prop(p) => (0..n).map(|i| holds(i, p)).collect(),
        Ltl::Not(a) => eval_lasso(a, n, k, holds).into_iter().map(|b| !b).collect(),
        Ltl::And(a, b) => zip(eval_lasso(a, n, k, holds), eval_lasso(b, n, k, holds), |x, y| x && y),
        Ltl::Or(a, b) => zip(eval_lasso(a, n, k, holds), eval_lasso(b, n, k, holds), |x, y| x || y),
        Ltl::Implies(a, b) => zip(eval_lasso(a, n, k, holds), eval_lasso(b, n, k, holds), |x, y| !x || y),
        Ltl::Until(a, b) => {
            let (a, b) = (eval_lasso(a, n, k, holds), eval_lasso(b, n, k, holds));
            // least fixpoint of  u = b \/ (a /\ X u)
            let mut u = b.clone();
            loop {
                let v: Vec<bool> = (0..n).map(|i| b[i] || (a[i] && u[next(i)])).collect();
                if v == u {
                    return u;
                }
                u = v;
            }
        }
        Ltl::Eventually(a) => eval_lasso(&Ltl::until(Ltl::True, (**a).clone()), n, k, holds),
        Ltl::Always(a) => eval_lasso(&Ltl::not(Ltl::eventually(Ltl::not((**a).clone()))), n, k, holds),
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Whether the lasso's word satisfies `f` at its start.
pub fn lasso_satisfies(g: &TimedGraph, f: &Ltl, l: &Lasso) -> bool {
    let holds = |i: usize, p: &orc_core::analysis::Prop| {
        let bit = g.atoms.iter().position(|a| a == p).expect("atom of the graph");
        g.nodes[l.nodes[i] as usize].props >> bit & 1 == 1
    };
    eval_lasso(f, l.nodes.len(), l.loop_start, &holds)[0]
}

/// Some lasso from the root of length at most `max_len` violating `f`.
pub fn brute_force_violation(g: &TimedGraph, f: &Ltl, max_len: usize) -> Option<Lasso> {
    fn go(g: &TimedGraph, f: &Ltl, path: &mut Vec<u32>, max_len: usize) -> Option<Lasso> {
        let last = *path.last().unwrap();
        for w in g.completed_succ(last).collect::<Vec<_>>() {
            // close a loop back to an earlier position
            for (k, &v) in path.iter().enumerate() {
                if v == w {
                    let l = Lasso { nodes: path.clone(), loop_start: k };
                    if !lasso_satisfies(g, f, &l) {
                        return Some(l);
                    }
                }
            }
            if path.len() < max_len {
                path.push(w);
                if let Some(l) = go(g, f, path, max_len) {
                    return Some(l);
                }
                path.pop();
            }
        }
        None
    }
    go(g, f, &mut vec![0], max_len)
}
