//! The four auction sites as pure state transformers over `Const` states.

use num_rational::Rational64;
use orc_core::semantics::{SiteBehavior, SiteOutcome, SiteReply};
use orc_core::Const;

/// `(id, duration, start_bid)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub id: i64,
    pub duration: i64,
    pub start_bid: i64,
}

impl Item {
    pub fn new(id: i64, duration: i64, start_bid: i64) -> Self {
        assert!(duration > 0, "auction duration must be positive");
        Item { id, duration, start_bid }
    }

    pub fn to_const(&self) -> Const {
        Const::Tuple(vec![Const::Int(self.id), Const::Int(self.duration), Const::Int(self.start_bid)])
    }

    pub fn from_const(c: &Const) -> Option<Item> {
        match c.as_tuple()? {
            [id, d, m] => Some(Item { id: id.as_int()?, duration: d.as_int()?, start_bid: m.as_int()? }),
            _ => None,
        }
    }
}

/// A scripted bidder: outbids the current bid by `increment`, up to `max_bid`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidderScript {
    pub bidder: i64,
    pub max_bid: i64,
    pub increment: i64,
}

impl BidderScript {
    pub fn new(bidder: i64, max_bid: i64, increment: i64) -> Self {
        BidderScript { bidder, max_bid, increment }
    }

    /// The bid this bidder places over `current`, if any.
    pub fn bid_over(&self, current: i64) -> Option<i64> {
        (self.max_bid > current).then(|| (current + self.increment).min(self.max_bid))
    }
}

pub fn default_items() -> Vec<Item> {
    vec![Item::new(1910, 5, 500), Item::new(1720, 7, 700)]
}

/// Bidder 3 has the highest ceiling and wins both items.
pub fn default_bidders() -> Vec<BidderScript> {
    vec![BidderScript::new(1, 600, 50), BidderScript::new(2, 700, 75), BidderScript::new(3, 800, 100)]
}

fn msg_name(args: &[Const]) -> Option<&str> {
    args.first().and_then(Const::as_str)
}

fn tuple(c: &Const) -> &[Const] {
    c.as_tuple().unwrap_or(&[])
}

// ---------------------------------------------------------------- Seller

/// Hands out its items one per `postNext`, then goes silent.
pub struct Seller;

impl Seller {
    pub fn state(items: &[Item]) -> Const {
        Const::Tuple(items.iter().map(Item::to_const).collect())
    }

    pub fn items(state: &Const) -> Vec<Item> {
        tuple(state).iter().filter_map(Item::from_const).collect()
    }
}

impl SiteBehavior for Seller {
    fn name(&self) -> &str {
        "Seller"
    }

    fn handle(&self, state: &Const, args: &[Const], _: &Rational64) -> SiteOutcome {
        match (msg_name(args), tuple(state).split_first()) {
            (Some("postNext"), Some((head, rest))) => SiteOutcome::reply(Const::Tuple(rest.to_vec()), head.clone()),
            _ => SiteOutcome::silent(state.clone()),
        }
    }
}

// --------------------------------------------------------------- Bidders

/// State: one `(bidder, max, inc, records)` tuple per bidder, where
/// `records` lists every `(id, bid)` the bidder has placed, newest last.
pub struct Bidders;

impl Bidders {
    pub fn state(scripts: &[BidderScript]) -> Const {
        Const::Tuple(
            scripts
                .iter()
                .map(|s| {
                    Const::Tuple(vec![
                        Const::Int(s.bidder),
                        Const::Int(s.max_bid),
                        Const::Int(s.increment),
                        Const::Tuple(Vec::new()),
                    ])
                })
                .collect(),
        )
    }

    /// Every `(bidder, id, bid)` recorded so far.
    pub fn records(state: &Const) -> Vec<(i64, i64, i64)> {
        let mut out = Vec::new();
        for b in tuple(state) {
            let fields = tuple(b);
            let Some(n) = fields.first().and_then(Const::as_int) else { continue };
            for r in fields.get(3).map(tuple).unwrap_or(&[]) {
                if let [id, bid] = tuple(r) {
                    if let (Some(id), Some(bid)) = (id.as_int(), bid.as_int()) {
                        out.push((n, id, bid));
                    }
                }
            }
        }
        out
    }

    fn script(b: &Const) -> Option<BidderScript> {
        match tuple(b) {
            [n, max, inc, _] => Some(BidderScript::new(n.as_int()?, max.as_int()?, inc.as_int()?)),
            _ => None,
        }
    }
}

impl SiteBehavior for Bidders {
    fn name(&self) -> &str {
        "Bidders"
    }

    /// `("nextBidList", id, current)` replies with a tuple of `(bid, bidder)`
    /// pairs, possibly empty.
    fn handle(&self, state: &Const, args: &[Const], _: &Rational64) -> SiteOutcome {
        let (Some("nextBidList"), [_, id, cur]) = (msg_name(args), args) else {
            return SiteOutcome::silent(state.clone());
        };
        let Some(cur) = cur.as_int() else { return SiteOutcome::silent(state.clone()) };
        let mut bids = Vec::new();
        let mut next = Vec::new();
        for b in tuple(state) {
            match Bidders::script(b).and_then(|s| s.bid_over(cur).map(|bid| (s, bid))) {
                Some((s, bid)) => {
                    let mut fields = tuple(b).to_vec();
                    let mut recs = tuple(&fields[3]).to_vec();
                    recs.push(Const::Tuple(vec![id.clone(), Const::Int(bid)]));
                    fields[3] = Const::Tuple(recs);
                    next.push(Const::Tuple(fields));
                    bids.push(Const::Tuple(vec![Const::Int(bid), Const::Int(s.bidder)]));
                }
                None => next.push(b.clone()),
            }
        }
        SiteOutcome::reply(Const::Tuple(next), Const::Tuple(bids))
    }
}

// ---------------------------------------------------------------- MaxBid

/// Publishes the highest `(bid, bidder)` pair; silent on an empty list so
/// the round's timer decides it.
pub struct MaxBid;

impl MaxBid {
    pub fn best(bids: &[Const]) -> Option<Const> {
        let mut best: Option<(i64, &Const)> = None;
        for b in bids {
            let Some(v) = b.project(0).and_then(|c| c.as_int()) else { continue };
            if best.is_none_or(|(m, _)| v > m) {
                best = Some((v, b));
            }
        }
        best.map(|(_, b)| b.clone())
    }
}

impl SiteBehavior for MaxBid {
    fn name(&self) -> &str {
        "MaxBid"
    }

    fn handle(&self, state: &Const, args: &[Const], _: &Rational64) -> SiteOutcome {
        let bids = args.first().map(tuple).unwrap_or(&[]);
        match MaxBid::best(bids) {
            Some(b) => SiteOutcome::reply(state.clone(), b),
            None => SiteOutcome::silent(state.clone()),
        }
    }
}

// --------------------------------------------------------------- Auction

/// State: `(available items, winners (bidder, id, bid), parked getNext count)`.
///
/// `post` parks its reply until the item is won; `getNext` parks while no
/// item is available and is released by the next `post`.
pub struct Auction;

const GET_NEXT: &str = "getNext";

fn post_key(id: &Const) -> Const {
    Const::Tuple(vec![Const::str("post"), id.clone()])
}

impl Auction {
    pub fn initial_state() -> Const {
        Const::Tuple(vec![Const::Tuple(Vec::new()), Const::Tuple(Vec::new()), Const::Int(0)])
    }

    fn parts(state: &Const) -> (Vec<Const>, Vec<Const>, i64) {
        match tuple(state) {
            [a, w, n] => (tuple(a).to_vec(), tuple(w).to_vec(), n.as_int().unwrap_or(0)),
            _ => (Vec::new(), Vec::new(), 0),
        }
    }

    fn pack(available: Vec<Const>, winners: Vec<Const>, waiting: i64) -> Const {
        Const::Tuple(vec![Const::Tuple(available), Const::Tuple(winners), Const::Int(waiting)])
    }

    /// Every `(bidder, id, bid)` declared a winner, in order.
    pub fn winners(state: &Const) -> Vec<(i64, i64, i64)> {
        Auction::parts(state)
            .1
            .iter()
            .filter_map(|w| match tuple(w) {
                [n, id, b] => Some((n.as_int()?, id.as_int()?, b.as_int()?)),
                _ => None,
            })
            .collect()
    }

    pub fn available(state: &Const) -> Vec<Item> {
        Auction::parts(state).0.iter().filter_map(Item::from_const).collect()
    }
}

fn item_id(item: &Const) -> String {
    item.project(0).map(|c| c.to_string()).unwrap_or_else(|| "?".into())
}

impl SiteBehavior for Auction {
    fn name(&self) -> &str {
        "Auction"
    }

    fn handle(&self, state: &Const, args: &[Const], _: &Rational64) -> SiteOutcome {
        let (mut available, mut winners, mut waiting) = Auction::parts(state);
        let name = msg_name(args).unwrap_or("");
        let mut log = vec![format!("Received \"{name}\"")];
        let mut releases = Vec::new();
        let reply = match (name, args) {
            ("post", [_, item]) => {
                log.push(format!("Item {} posted", item_id(item)));
                if waiting > 0 {
                    waiting -= 1;
                    log.push(format!("Bidding to start for {}", item_id(item)));
                    releases.push((Const::str(GET_NEXT), item.clone()));
                } else {
                    available.push(item.clone());
                }
                SiteReply::Defer(post_key(&item.project(0).unwrap_or(Const::Signal)))
            }
            (GET_NEXT, [_]) => {
                if available.is_empty() {
                    waiting += 1;
                    SiteReply::Defer(Const::str(GET_NEXT))
                } else {
                    let item = available.remove(0);
                    log.push(format!("Bidding to start for {}", item_id(&item)));
                    SiteReply::Now(item)
                }
            }
            ("won", [_, bidder, id, bid]) => {
                log.push(format!("Item {id} won by Bidder {bidder}"));
                winners.push(Const::Tuple(vec![bidder.clone(), id.clone(), bid.clone()]));
                releases.push((post_key(id), Const::Signal));
                SiteReply::Now(Const::Signal)
            }
            _ => SiteReply::Silent,
        };
        SiteOutcome { state: Auction::pack(available, winners, waiting), reply, releases, log }
    }
}
