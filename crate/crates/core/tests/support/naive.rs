//! Brute-force reference for the fused socket model: every instance of every
//! rule is applied on its own, in every order, and time passes only when no
//! instantaneous rule is enabled at all.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Signed;
use orc_core::lang::parse;
use orc_core::semantics::{Directory, ExprObject, LocalConfig, ReplyTo, SiteBehavior, SiteObject, SiteOutcome};
use orc_core::sim::{GlobalSystem, Owner, Process, SimModel, SocketMsg};
use orc_core::time::TimeInf;
use orc_core::{Const, EOid, Loc, SiteId, Time};

pub struct Echo;

impl SiteBehavior for Echo {
    fn name(&self) -> &str {
        "Echo"
    }

    fn handle(&self, state: &Const, args: &[Const], _: &Rational64) -> SiteOutcome {
        SiteOutcome::reply(state.clone(), Const::from_args(args.to_vec()))
    }
}

pub struct Mute;

impl SiteBehavior for Mute {
    fn name(&self) -> &str {
        "Mute"
    }

    fn handle(&self, state: &Const, _: &[Const], _: &Rational64) -> SiteOutcome {
        SiteOutcome::silent(state.clone())
    }
}

/// Appends every argument to its state and answers with a signal.
pub struct Log;

impl SiteBehavior for Log {
    fn name(&self) -> &str {
        "Log"
    }

    fn handle(&self, state: &Const, args: &[Const], _: &Rational64) -> SiteOutcome {
        let mut seen = match state {
            Const::Tuple(v) => v.clone(),
            _ => Vec::new(),
        };
        seen.push(Const::from_args(args.to_vec()));
        SiteOutcome::reply(Const::Tuple(seen), Const::Signal)
    }
}

fn site_loc(i: u16) -> Loc {
    Loc::new("localhost", 45000 + i)
}

/// A client node running `goal` plus one node per named site. Any other
/// capitalized name resolves to a location nobody serves.
pub fn system(goal: &str, sites: &[&str], delays: &[Time]) -> GlobalSystem {
    let mut dir = Directory::new();
    let mut procs = Vec::new();
    let client = Loc::new("localhost", 44000);
    for (i, name) in sites.iter().enumerate() {
        let id = SiteId::External(site_loc(i as u16), 0);
        dir.insert(name.to_string(), id.clone());
        let b: Arc<dyn SiteBehavior> = match *name {
            "Echo" => Arc::new(Echo),
            "Mute" => Arc::new(Mute),
            "Log" => Arc::new(Log),
            other => panic!("no site {other}"),
        };
        let state = if *name == "Log" { Const::Tuple(Vec::new()) } else { Const::Signal };
        procs.push(Process::site_node(name, site_loc(i as u16), SiteObject::new(id, b, state)));
    }
    dir.insert("Nobody".into(), SiteId::External(Loc::new("localhost", 1), 0));
    let mut sys = LocalConfig::new(Arc::new(dir));
    sys.exprs.push(ExprObject::from_program(EOid::new(client.clone(), 0), &parse(goal).unwrap()));
    procs.insert(0, Process::expr_node("client", client, sys));
    GlobalSystem::new(procs, delays.to_vec())
}

fn sock_field(m: &mut SocketMsg) -> Option<&mut u64> {
    use SocketMsg::*;
    match m {
        AcceptedClient { sock, .. }
        | CreatedSocket { sock, .. }
        | Send { sock, .. }
        | Sent { sock, .. }
        | Receive { sock, .. }
        | Received { sock, .. }
        | CloseSocket { sock, .. }
        | ClosedSocket { sock, .. } => Some(sock),
        _ => None,
    }
}

fn server_field(m: &mut SocketMsg) -> Option<&mut u64> {
    use SocketMsg::*;
    match m {
        CreatedServer { server, .. } | AcceptClient { server, .. } | AcceptedClient { server, .. } => Some(server),
        _ => None,
    }
}

/// The state with manager-allocated ids renamed canonically: servers by
/// their address, sockets by the call whose proxy owns the client end. Two
/// states that differ only in allocation order become equal.
pub fn observe(s: &GlobalSystem) -> GlobalSystem {
    let mut sock_key: BTreeMap<u64, String> = BTreeMap::new();
    for p in &s.procs {
        for m in &p.io {
            let mut m = m.clone();
            let owner = match &m {
                SocketMsg::CreatedSocket { owner, .. }
                | SocketMsg::Send { owner, .. }
                | SocketMsg::Sent { owner, .. }
                | SocketMsg::Receive { owner, .. }
                | SocketMsg::Received { owner, .. }
                | SocketMsg::CloseSocket { owner, .. }
                | SocketMsg::ClosedSocket { owner, .. } => owner.clone(),
                _ => continue,
            };
            if let (Owner::Proxy(h), Some(k)) = (owner, sock_field(&mut m)) {
                sock_key.insert(*k, format!("{}/{}", p.pid, h));
            }
        }
    }
    for k in &s.sockets {
        sock_key.entry(k.id).or_insert_with(|| format!("~{}", k.id));
    }
    let mut keys: Vec<&String> = sock_key.values().collect();
    keys.sort();
    let sock: BTreeMap<u64, u64> =
        sock_key.iter().map(|(id, key)| (*id, keys.iter().position(|k| *k == key).unwrap() as u64)).collect();
    let mut servers = s.servers.clone();
    servers.sort_by(|a, b| (&a.address, a.port).cmp(&(&b.address, b.port)));
    let server: BTreeMap<u64, u64> = servers.iter().enumerate().map(|(i, sv)| (sv.id, i as u64)).collect();
    let rs = |id: &mut u64| *id = sock.get(id).copied().unwrap_or(1_000_000 + *id);

    let mut o = s.clone();
    o.counter = 0;
    o.servers = servers;
    for sv in &mut o.servers {
        sv.id = server[&sv.id];
    }
    for k in &mut o.sockets {
        rs(&mut k.id);
    }
    o.sockets.sort();
    for p in &mut o.procs {
        let p = Arc::make_mut(p);
        p.touch();
        for m in &mut p.io {
            if let Some(k) = sock_field(m) {
                rs(k);
            }
            if let Some(n) = server_field(m) {
                *n = server[n];
            }
        }
        p.io.sort();
        for site in &mut p.sys.sites {
            for (_, to) in &mut site.pending {
                if let ReplyTo::Socket(k) = to {
                    rs(k);
                }
            }
        }
    }
    o
}

/// True iff nothing instantaneous is enabled.
pub fn quiescent(m: &SimModel, s: &GlobalSystem) -> bool {
    m.raw_rules(s).is_empty()
}

fn tick(m: &SimModel, s: &GlobalSystem, bound: &Rational64) -> Option<GlobalSystem> {
    let TimeInf::Finite(r) = m.mte(s) else { return None };
    if !r.is_positive() || s.elapsed + r > *bound {
        return None;
    }
    let mut next = s.clone();
    m.delta(&mut next, &r);
    Some(next)
}

/// Quiescent states reachable within `bound` by single rule instances.
pub fn naive_quiescent(
    m: &SimModel,
    s0: GlobalSystem,
    bound: Rational64,
    cap: usize,
) -> Result<HashSet<GlobalSystem>, String> {
    let mut seen = HashSet::new();
    let mut out = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(observe(&s0));
    queue.push_back(s0);
    while let Some(s) = queue.pop_front() {
        if seen.len() > cap {
            return Err(format!("more than {cap} raw states"));
        }
        let rules = m.raw_rules(&s);
        let mut next = Vec::new();
        if rules.is_empty() {
            out.insert(observe(&s));
            next.extend(tick(m, &s, &bound));
        }
        for r in &rules {
            let mut n = s.clone();
            m.apply_raw(&mut n, r).map_err(|e| e.to_string())?;
            next.push(n);
        }
        for n in next {
            if seen.insert(observe(&n)) {
                queue.push_back(n);
            }
        }
    }
    Ok(out)
}

/// Quiescent states of the fused model within `bound`.
pub fn fused_quiescent(
    m: &SimModel,
    s0: GlobalSystem,
    bound: Rational64,
    cap: usize,
) -> Result<HashSet<GlobalSystem>, String> {
    let s0 = m.initial(s0).map_err(|e| e.to_string())?;
    let mut seen = HashSet::new();
    let mut out = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(s0.clone());
    queue.push_back(s0);
    while let Some(s) = queue.pop_front() {
        if seen.len() > cap {
            return Err(format!("more than {cap} fused states"));
        }
        if quiescent(m, &s) {
            out.insert(observe(&s));
        }
        for (n, _) in m.successors(&s).map_err(|e| e.to_string())? {
            if n.elapsed <= bound && seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    Ok(out)
}

pub struct Scenario {
    pub name: &'static str,
    pub goal: &'static str,
    pub sites: &'static [&'static str],
    pub delays: Vec<Time>,
    pub errors: bool,
    pub interleave: bool,
    pub bound: i64,
}

fn ds(v: &[i64]) -> Vec<Time> {
    v.iter().map(|&d| Time::from(Rational64::from_integer(d))).collect()
}

pub fn scenarios() -> Vec<Scenario> {
    let sc = |name, goal, sites, delays: &[i64], errors, interleave, bound| Scenario {
        name,
        goal,
        sites,
        delays: ds(delays),
        errors,
        interleave,
        bound,
    };
    vec![
        sc("one call", "Echo(1)", &["Echo"], &[1], false, false, 4),
        sc("two calls, two delays", "Echo(1) | Echo(2)", &["Echo"], &[0, 1], false, false, 4),
        sc("sequential calls with errors", "Echo(1) >x> Echo(x)", &["Echo"], &[0], true, false, 3),
        sc("missing server", "Nobody(1) | Echo(2)", &["Echo"], &[1], true, false, 3),
        sc("missing server, no errors", "Nobody(1) | Echo(2)", &["Echo"], &[1], false, false, 3),
        sc("silent site", "Mute(1) | Echo(2)", &["Mute", "Echo"], &[0, 1], false, false, 3),
        sc("relay with errors", "Echo(1) >x> Log(x)", &["Echo", "Log"], &[0, 1], true, false, 4),
        sc("timer then call", "rtimer(1) >> Echo(3)", &["Echo"], &[0, 1], false, true, 4),
        sc(
            "timeout idiom",
            "(let(x) <x< (Echo(5) | rtimer(1) >> let(0))) >y> Log(y)",
            &["Echo", "Log"],
            &[0, 1],
            false,
            true,
            5,
        ),
    ]
}

impl Scenario {
    pub fn model(&self) -> SimModel {
        SimModel { explore_socket_errors: self.errors, interleave: self.interleave, fuel: 10_000 }
    }

    pub fn init(&self) -> GlobalSystem {
        system(self.goal, self.sites, &self.delays)
    }

    /// Compares both quiescent sets; returns their common size.
    pub fn check(&self) -> Result<usize, String> {
        let m = self.model();
        let bound = Rational64::from_integer(self.bound);
        let naive = naive_quiescent(&m, self.init(), bound, 200_000)?;
        let fused = fused_quiescent(&m, self.init(), bound, 200_000)?;
        if naive == fused {
            return Ok(naive.len());
        }
        let only = |a: &HashSet<GlobalSystem>, b: &HashSet<GlobalSystem>| a.difference(b).next().map(|s| s.to_string());
        Err(format!(
            "{}: {} naive vs {} fused quiescent states\nonly naive: {:?}\nonly fused: {:?}",
            self.name,
            naive.len(),
            fused.len(),
            only(&naive, &fused),
            only(&fused, &naive)
        ))
    }
}

/// The values logged in some quiescent state of a scenario.
pub fn logged(states: &HashSet<GlobalSystem>) -> HashSet<Vec<Const>> {
    states
        .iter()
        .filter_map(|s| s.proc_named("Log")?.site("Log").map(|l| l.state.clone()))
        .filter_map(|c| match c {
            Const::Tuple(v) if !v.is_empty() => Some(v),
            _ => None,
        })
        .collect()
}
