use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use num_rational::Rational64;

use super::explore::fingerprint;
use super::AnalysisError;
use crate::sim::{GlobalSystem, SimModel};
use crate::Time;

#[derive(Clone, Debug)]
pub enum Earliest {
    Found {
        state: GlobalSystem,
        time: Rational64,
        /// `(time, rule)` for each transition from the initial state.
        trace: Vec<(Rational64, String)>,
    },
    /// The whole reachable space (within the bound) was searched.
    NotFound { explored: usize },
    /// The node cap was hit first.
    Inconclusive { explored: usize },
}

struct Entry {
    time: Rational64,
    seq: u64,
    state: GlobalSystem,
    /// Index into the trace arena.
    at: usize,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        (self.time, self.seq) == (o.time, o.seq)
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(o.time, o.seq))
    }
}

/// Uniform-cost search on elapsed time for the first state satisfying `goal`.
/// Ties are broken by discovery order, so results are deterministic.
pub fn find_earliest(
    model: &SimModel,
    init: GlobalSystem,
    goal: &dyn Fn(&GlobalSystem) -> bool,
    bound: &Time,
    node_cap: usize,
) -> Result<Earliest, AnalysisError> {
    let root = model.initial(init)?;
    // (parent, time, rule) per settled-or-queued state
    let mut arena: Vec<(usize, Rational64, String)> = vec![(usize::MAX, root.elapsed, "init".into())];
    let mut seen: HashSet<u128> = HashSet::new();
    seen.insert(fingerprint(&root));
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Reverse(Entry { time: root.elapsed, seq, state: root, at: 0 }));
    let mut settled = 0;
    while let Some(Reverse(e)) = heap.pop() {
        settled += 1;
        if goal(&e.state) {
            let mut trace = Vec::new();
            let mut i = e.at;
            while arena[i].0 != usize::MAX {
                trace.push((arena[i].1, arena[i].2.clone()));
                i = arena[i].0;
            }
            trace.reverse();
            return Ok(Earliest::Found { time: e.time, state: e.state, trace });
        }
        if seen.len() >= node_cap {
            return Ok(Earliest::Inconclusive { explored: settled });
        }
        for (s, tr) in model.successors(&e.state)? {
            if !Time::from(s.elapsed).le_time(bound) || !seen.insert(fingerprint(&s)) {
                continue;
            }
            arena.push((e.at, s.elapsed, tr.rule));
            seq += 1;
            heap.push(Reverse(Entry { time: s.elapsed, seq, state: s, at: arena.len() - 1 }));
        }
    }
    Ok(Earliest::NotFound { explored: settled })
}
