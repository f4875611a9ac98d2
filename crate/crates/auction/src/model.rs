use std::sync::Arc;

use orc_core::analysis::{BasicProps, Definitions, Prop, PropSet};
use orc_core::lang::{parse, parse_expr, Program};
use orc_core::semantics::{Directory, ExprObject, LocalConfig, SiteBehavior, SiteObject};
use orc_core::sim::{GlobalSystem, Process};
use orc_core::{Const, EOid, Loc, SiteId, Time};

use crate::sites::{default_bidders, default_items, Auction, BidderScript, Bidders, Item, MaxBid, Seller};
use crate::PROGRAM;

/// The parsed auction program. Its goal runs both orchestrations in one
/// configuration; [`deployment`] splits them across two nodes.
pub fn program() -> Program {
    parse(PROGRAM).expect("the bundled auction program parses")
}

/// Items and bidder scripts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setup {
    pub items: Vec<Item>,
    pub bidders: Vec<BidderScript>,
}

impl Default for Setup {
    fn default() -> Self {
        Setup { items: default_items(), bidders: default_bidders() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    /// Runs an expression of the program.
    Expr { goal: &'static str },
    /// Serves one site.
    Site,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub name: &'static str,
    pub port: u16,
    pub role: NodeRole,
}

/// Default ports, one node each.
pub const PORTS: [(&str, u16); 6] = [
    ("Posting", 44100),
    ("Bidding", 44200),
    ("Seller", 44300),
    ("Bidders", 44400),
    ("MaxBid", 44500),
    ("Auction", 44600),
];

/// The six nodes: two expression nodes and one node per site.
pub fn deployment() -> Vec<NodeSpec> {
    PORTS
        .iter()
        .map(|&(name, port)| {
            let role = match name {
                "Posting" => NodeRole::Expr { goal: "Posting(Seller)" },
                "Bidding" => NodeRole::Expr { goal: "Bidding()" },
                _ => NodeRole::Site,
            };
            NodeSpec { name, port, role }
        })
        .collect()
}

/// The behavior and initial state of a site node.
pub fn behavior(name: &str, setup: &Setup) -> Option<(Arc<dyn SiteBehavior>, Const)> {
    Some(match name {
        "Seller" => (Arc::new(Seller), Seller::state(&setup.items)),
        "Bidders" => (Arc::new(Bidders), Bidders::state(&setup.bidders)),
        "MaxBid" => (Arc::new(MaxBid), Const::Signal),
        "Auction" => (Arc::new(Auction), Auction::initial_state()),
        _ => return None,
    })
}

fn directory(address: &str) -> Directory {
    deployment()
        .iter()
        .filter(|n| n.role == NodeRole::Site)
        .map(|n| (n.name.to_string(), SiteId::External(Loc::new(address, n.port), 0)))
        .collect()
}

/// The simulation model's initial state for delay set `ds`, default setup.
pub fn initial(ds: Vec<Time>) -> GlobalSystem {
    initial_with(&Setup::default(), ds)
}

pub fn initial_with(setup: &Setup, ds: Vec<Time>) -> GlobalSystem {
    let address = "localhost";
    let prog = program();
    let names: Vec<&str> = prog.decls.iter().map(|d| d.name.as_str()).collect();
    let env = Arc::new(orc_core::semantics::env_of(&prog));
    let dir = Arc::new(directory(address));
    let procs = deployment()
        .into_iter()
        .map(|n| {
            let loc = Loc::new(address, n.port);
            match n.role {
                NodeRole::Expr { goal } => {
                    let goal = parse_expr(goal, &names).expect("deployment goals parse");
                    let mut sys = LocalConfig::new(dir.clone());
                    sys.exprs.push(ExprObject::new(EOid::new(loc.clone(), 0), env.clone(), &goal));
                    Process::expr_node(n.name, loc, sys)
                }
                NodeRole::Site => {
                    let (b, state) = behavior(n.name, setup).expect("every site node has a behavior");
                    Process::site_node(n.name, loc.clone(), SiteObject::new(SiteId::External(loc, 0), b, state))
                }
            }
        })
        .collect();
    GlobalSystem::new(procs, ds)
}

/// `commError`, `hasBid(id)`, `sold(id)` and `conflict(id)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct AuctionProps;

fn site_state<'a>(s: &'a GlobalSystem, name: &str) -> Option<&'a Const> {
    s.proc_named(name).and_then(|p| p.site(name)).map(|o| &o.state)
}

impl AuctionProps {
    pub fn has_bid(s: &GlobalSystem, id: i64) -> bool {
        site_state(s, "Bidders").is_some_and(|st| Bidders::records(st).iter().any(|r| r.1 == id))
    }

    pub fn sold(s: &GlobalSystem, id: i64) -> bool {
        site_state(s, "Auction").is_some_and(|st| Auction::winners(st).iter().any(|w| w.1 == id))
    }

    pub fn conflict(s: &GlobalSystem, id: i64) -> bool {
        site_state(s, "Auction").is_some_and(|st| {
            let ws = Auction::winners(st);
            let bidders: Vec<i64> = ws.iter().filter(|w| w.1 == id).map(|w| w.0).collect();
            bidders.iter().any(|a| bidders.iter().any(|b| a != b))
        })
    }
}

impl PropSet for AuctionProps {
    fn eval(&self, p: &Prop, s: &GlobalSystem) -> Option<bool> {
        let id = || match p.args.as_slice() {
            [Const::Int(id)] => Some(*id),
            _ => None,
        };
        match p.name.as_str() {
            "hasBid" => id().map(|i| AuctionProps::has_bid(s, i)),
            "sold" => id().map(|i| AuctionProps::sold(s, i)),
            "conflict" => id().map(|i| AuctionProps::conflict(s, i)),
            _ => BasicProps.eval(p, s),
        }
    }
}

/// The named auction properties.
pub const FORMULAS: [&str; 4] = [
    "commit(id) = hasBid(id) -> <> sold(id)",
    "commitAllNoErrors = ([] ~ commError) -> [] (commit(1910) /\\ commit(1720))",
    "uniqueWinner(id) = ~ conflict(id)",
    "uniqueWinnerAll = [] (uniqueWinner(1910) /\\ uniqueWinner(1720))",
];

pub fn definitions() -> Definitions {
    let mut d = Definitions::new();
    for f in FORMULAS {
        d.define(f).expect("bundled formulas parse");
    }
    d
}
