use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use orc_core::lang::{parse, parse_expr, Expression, Program};
use orc_core::semantics::SiteBehavior;
use orc_core::{Const, Loc};
use serde::{Deserialize, Serialize};

use crate::wire;

/// Shortest tick period accepted without `allow_fast_ticks`.
pub const MIN_TICK_MS: u64 = 200;

/// A node configuration file.
///
/// ```toml
/// name = "Auction"
/// self_loc = "localhost:44600"
/// clock_port = 45600
/// tick_period_ms = 1000
///
/// [role]
/// kind = "site"
/// site = "Auction"
///
/// [peers]
/// Seller = "localhost:44300"
/// ```
///
/// An expression node has `kind = "expr"`, a `program` path (relative to
/// the file) and a `goal` expression over the program's declarations. A
/// site node may override its initial state with `state`, a constant in
/// wire encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub self_loc: String,
    pub clock_port: u16,
    pub tick_period_ms: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_fast_ticks: bool,
    /// Run the ticker inside the node process.
    #[serde(default = "yes")]
    pub spawn_ticker: bool,
    pub role: RoleConfig,
    #[serde(default)]
    pub peers: BTreeMap<String, String>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RoleConfig {
    Expr {
        program: PathBuf,
        goal: String,
    },
    Site {
        site: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("bad config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("bad location `{0}`; expected host:port")]
    Loc(String),
    #[error("tick_period_ms = {0} is below {MIN_TICK_MS}; set allow_fast_ticks to override")]
    FastTicks(u64),
    #[error("tick_period_ms must be positive")]
    ZeroTicks,
    #[error("unknown site behavior `{0}`")]
    UnknownSite(String),
    #[error("bad initial state: {0}")]
    State(#[from] wire::DecodeError),
    #[error("program {path}: {msg}")]
    Program { path: PathBuf, msg: String },
    #[error("goal `{goal}`: {msg}")]
    Goal { goal: String, msg: String },
}

pub fn parse_loc(s: &str) -> Result<Loc, ConfigError> {
    let (host, port) = s.rsplit_once(':').ok_or_else(|| ConfigError::Loc(s.into()))?;
    let port = port.parse().map_err(|_| ConfigError::Loc(s.into()))?;
    if host.is_empty() {
        return Err(ConfigError::Loc(s.into()));
    }
    Ok(Loc::new(host, port))
}

/// What a resolved node runs.
#[derive(Clone)]
pub enum Role {
    Expr { program: Program, goal: Expression },
    Site { behavior: Arc<dyn SiteBehavior>, state: Const },
}

/// A validated configuration, ready for [`crate::run_node`].
#[derive(Clone)]
pub struct Node {
    pub name: String,
    pub self_loc: Loc,
    pub clock_port: u16,
    pub tick_period: Duration,
    pub spawn_ticker: bool,
    pub role: Role,
    pub peers: BTreeMap<String, Loc>,
    /// Internal steps allowed between two ticks before a Zeno suspicion.
    pub fuel: usize,
}

/// Looks up a site behavior and its default initial state by name.
pub type SiteRegistry<'a> = &'a dyn Fn(&str) -> Option<(Arc<dyn SiteBehavior>, Const)>;

impl NodeConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let s = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// Checks the config and loads what it names. Relative program paths
    /// are taken from `base`.
    pub fn resolve(&self, base: &Path, sites: SiteRegistry<'_>) -> Result<Node, ConfigError> {
        match self.tick_period_ms {
            0 => return Err(ConfigError::ZeroTicks),
            ms if ms < MIN_TICK_MS && !self.allow_fast_ticks => return Err(ConfigError::FastTicks(ms)),
            _ => {}
        }
        let self_loc = parse_loc(&self.self_loc)?;
        let peers =
            self.peers.iter().map(|(k, v)| Ok((k.clone(), parse_loc(v)?))).collect::<Result<_, ConfigError>>()?;
        let role = match &self.role {
            RoleConfig::Expr { program, goal } => {
                let path = base.join(program);
                let src = std::fs::read_to_string(&path)
                    .map_err(|source| ConfigError::Read { path: path.clone(), source })?;
                let program = parse(&src).map_err(|e| ConfigError::Program { path, msg: e.to_string() })?;
                let names: Vec<&str> = program.decls.iter().map(|d| d.name.as_str()).collect();
                let goal_expr = parse_expr(goal, &names)
                    .map_err(|e| ConfigError::Goal { goal: goal.clone(), msg: e.to_string() })?;
                Role::Expr { program, goal: goal_expr }
            }
            RoleConfig::Site { site, state } => {
                let (behavior, default) = sites(site).ok_or_else(|| ConfigError::UnknownSite(site.clone()))?;
                let state = match state {
                    Some(s) => wire::decode(s)?,
                    None => default,
                };
                Role::Site { behavior, state }
            }
        };
        let name = self.name.clone().unwrap_or_else(|| match &self.role {
            RoleConfig::Site { site, .. } => site.clone(),
            RoleConfig::Expr { goal, .. } => goal.clone(),
        });
        Ok(Node {
            name,
            self_loc,
            clock_port: self.clock_port,
            tick_period: Duration::from_millis(self.tick_period_ms),
            spawn_ticker: self.spawn_ticker,
            role,
            peers,
            fuel: 1_000_000,
        })
    }
}
