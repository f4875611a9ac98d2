//! The distributed auction: a seller posts items to an auction site, and a
//! bidding orchestration runs timed rounds against a pool of scripted
//! bidders until each item's duration is used up.
//!
//! The same site behaviors drive the simulation model ([`initial`]) and the
//! live runtime ([`deployment`]).

mod model;
pub mod sites;

pub use model::{
    behavior, definitions, deployment, initial, initial_with, program, AuctionProps, NodeRole, NodeSpec, Setup,
    FORMULAS, PORTS,
};
pub use sites::{default_bidders, default_items, Auction, BidderScript, Bidders, Item, MaxBid, Seller};

/// Source of the auction program.
pub const PROGRAM: &str = include_str!("../auction.orc");
