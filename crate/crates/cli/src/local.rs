use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use num_rational::Rational64;
use orc_core::lang::parse;
use orc_core::semantics::{Action, Directory, Event, ExprObject, LocalConfig, SiteObject};
use orc_core::time::{fmt_rat, Timed};
use orc_core::{EOid, Loc, SiteId, Time};
use orc_net::{run_node, run_ticker, LogSink, NodeConfig};

use crate::registry;

/// Runs a program in a single configuration. Time jumps straight to the
/// next due timer or message, so no wall clock is involved.
pub fn run(file: &Path, sites: Option<&str>, until: &str, fuel: usize) -> Result<bool> {
    let src = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let prog = parse(&src).map_err(|e| anyhow::anyhow!("{}: {e}", file.display()))?;
    let until: Time = until.parse()?;
    let here = Loc::new("local", 0);
    let mut dir = Directory::new();
    let mut hosted = Vec::new();
    if let Some(family) = sites {
        for (i, (name, b, state)) in registry::family(family)?.into_iter().enumerate() {
            let id = SiteId::External(Loc::new("local", i as u16 + 1), 0);
            dir.insert(name, id.clone());
            hosted.push(SiteObject::new(id, b, state));
        }
    }
    let mut sys = LocalConfig::new(Arc::new(dir));
    sys.sites = hosted;
    sys.exprs.push(ExprObject::from_program(EOid::new(here, 0), &prog));
    let mut out = std::io::stdout().lock();
    loop {
        let now = sys.now();
        let mut lines = Vec::new();
        sys.run_to_quiescence_with(fuel, |ev| match ev {
            Event::Expr { action: Action::Publish(c), .. } => lines.push(format!("published {c}")),
            Event::Expr { action: Action::DeadCall { name }, .. } => lines.push(format!("cannot call {name}")),
            Event::SiteCalled { log, .. } => lines.extend(log.iter().cloned()),
            _ => {}
        })?;
        for l in lines {
            writeln!(out, "{:>8}  {l}", fmt_rat(&now))?;
        }
        let stray = sys.take_outbound();
        if !stray.is_empty() {
            bail!("{} call(s) to sites outside this configuration; try --sites", stray.len());
        }
        let Time::Finite(r) = sys.mte() else { break };
        if r == Rational64::from_integer(0) {
            bail!("no progress at time {}", fmt_rat(&now));
        }
        if !Time::from(now + r).le_time(&until) {
            break;
        }
        sys.delta(&r);
    }
    writeln!(out, "{:>8}  quiescent", fmt_rat(&sys.now()))?;
    Ok(true)
}

pub fn node(config: &Path, fuel: usize) -> Result<bool> {
    let cfg = NodeConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let mut node = cfg.resolve(base, &registry::site)?;
    node.fuel = fuel;
    let name = node.name.clone();
    let sink: LogSink = Arc::new(move |l: &str| {
        let mut o = std::io::stdout().lock();
        let _ = writeln!(o, "[{name}] {l}");
        let _ = o.flush();
    });
    let stats = run_node(node, sink)?;
    eprintln!("{stats:?}");
    Ok(true)
}

pub fn ticker(host: &str, port: u16, period: u64) -> Result<bool> {
    if period == 0 {
        bail!("the period must be positive");
    }
    run_ticker(&Loc::new(host, port), Duration::from_millis(period))?;
    Ok(true)
}
