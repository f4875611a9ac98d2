use anyhow::Result;
use num_rational::Rational64;
use orc_core::analysis::{self, Earliest, ExploreOptions, Ltl, TimedGraph, Verdict};
use orc_core::sim::SimModel;
use orc_core::time::fmt_rat;
use orc_core::Time;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::registry;
use crate::Output;

pub struct Setup {
    pub initial: String,
    pub socket_errors: bool,
    pub interleave: bool,
    pub fuel: usize,
    pub output: Output,
}

impl Setup {
    fn model(&self) -> SimModel {
        SimModel { explore_socket_errors: self.socket_errors, interleave: self.interleave, fuel: self.fuel }
    }
}

fn time(s: &str) -> Result<Time> {
    Ok(s.parse::<Time>()?)
}

fn holding(g: &TimedGraph, v: u32) -> Vec<String> {
    let mask = g.nodes[v as usize].props;
    g.atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.to_string()).collect()
}

pub fn mc(s: &Setup, formula: &str, bound: &str, node_cap: usize, deepen: Option<&str>) -> Result<bool> {
    let m = registry::initial(&s.initial)?;
    let f: Ltl = m.defs.parse(formula)?;
    let opts = ExploreOptions { bound: time(bound)?, node_cap, parallel: true };
    let (v, g) = match deepen {
        None => analysis::mc(&s.model(), m.init, &f, &m.props, &opts)?,
        Some(step) => {
            let Some(step) = time(step)?.as_finite().copied().filter(|r| *r > Rational64::from_integer(0)) else {
                anyhow::bail!("the deepening step must be a positive time");
            };
            analysis::mc_deepening(&s.model(), m.init, &f, &m.props, &opts, step)?
        }
    };
    let explored = if g.bound == opts.bound {
        format!("States: {} (bound {})", g.len(), opts.bound)
    } else {
        format!("States: {} (bound {}; the counterexample holds for any larger bound)", g.len(), g.bound)
    };
    let holds = v.holds();
    match (s.output, v) {
        (Output::Text, Verdict::Holds) => {
            println!("Formula: {f}");
            println!("{explored}");
            println!("Result: true");
        }
        (Output::Text, Verdict::CounterExample(l)) => {
            println!("Formula: {f}");
            println!("{explored}");
            println!("Result: false");
            println!("Counterexample:");
            for (i, st) in l.steps(&g).iter().enumerate() {
                if i == l.loop_start {
                    println!("  -- loop --");
                }
                println!("  {:>8}  {:<24} {{{}}}", fmt_rat(&st.time), st.rule, holding(&g, st.node).join(", "));
            }
        }
        (Output::Json, v) => {
            let cx = match &v {
                Verdict::Holds => serde_json::Value::Null,
                Verdict::CounterExample(l) => json!({
                    "loop_start": l.loop_start,
                    "steps": l.steps(&g).iter().map(|st| json!({
                        "time": fmt_rat(&st.time),
                        "rule": st.rule,
                        "props": holding(&g, st.node),
                    })).collect::<Vec<_>>(),
                }),
            };
            let out = json!({
                "formula": f.to_string(),
                "bound": g.bound.to_string(),
                "states": g.len(),
                "result": holds,
                "counterexample": cx,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(holds)
}

pub fn find_earliest(s: &Setup, prop: &str, bound: &str, node_cap: usize) -> Result<bool> {
    let m = registry::initial(&s.initial)?;
    let p = m.defs.parse(prop)?;
    let r = analysis::find_earliest_prop(&s.model(), m.init, &p, &m.props, &time(bound)?, node_cap)?;
    let found = matches!(r, Earliest::Found { .. });
    match (s.output, r) {
        (Output::Text, Earliest::Found { time, trace, .. }) => {
            println!("Time: {}", fmt_rat(&time));
            println!("Steps: {}", trace.len());
        }
        (Output::Text, Earliest::NotFound { explored }) => println!("Not found ({explored} states)"),
        (Output::Text, Earliest::Inconclusive { explored }) => {
            println!("Unknown: node cap reached after {explored} states")
        }
        (Output::Json, r) => {
            let out = match r {
                Earliest::Found { time, trace, .. } => json!({
                    "result": "found",
                    "time": fmt_rat(&time),
                    "trace": trace.iter().map(|(t, r)| json!({"time": fmt_rat(t), "rule": r})).collect::<Vec<_>>(),
                }),
                Earliest::NotFound { explored } => json!({"result": "not_found", "explored": explored}),
                Earliest::Inconclusive { explored } => json!({"result": "inconclusive", "explored": explored}),
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(found)
}

pub fn simulate(s: &Setup, steps: usize, bound: &str, seed: Option<u64>) -> Result<bool> {
    let m = registry::initial(&s.initial)?;
    let model = s.model();
    let bound = time(bound)?;
    let mut rng = seed.map(StdRng::seed_from_u64);
    let mut state = model.initial(m.init)?;
    let mut trace = Vec::new();
    let mut stop = "steps";
    for _ in 0..steps {
        let mut succ = model.successors(&state)?;
        if succ.is_empty() {
            stop = "deadlock";
            break;
        }
        let k = rng.as_mut().map_or(0, |r| r.gen_range(0..succ.len()));
        let (next, tr) = succ.swap_remove(k);
        if !Time::from(next.elapsed).le_time(&bound) {
            stop = "bound";
            break;
        }
        trace.push((next.elapsed, tr.rule, tr.log));
        state = next;
    }
    match s.output {
        Output::Text => {
            for (t, rule, log) in &trace {
                println!("{:>8}  {rule}", fmt_rat(t));
                for l in log {
                    println!("{:>8}    {l}", "");
                }
            }
            println!("Stopped: {stop} at time {}", fmt_rat(&state.elapsed));
        }
        Output::Json => {
            let out = json!({
                "stopped": stop,
                "time": fmt_rat(&state.elapsed),
                "steps": trace.iter().map(|(t, r, log)| json!({"time": fmt_rat(t), "rule": r, "log": log})).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(true)
}
