use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use orc_auction::{deployment, NodeRole, PROGRAM};
use orc_net::{NodeConfig, RoleConfig};

/// Clock ports sit this far above the node ports.
pub const CLOCK_OFFSET: u16 = 1000;

/// The six auction node configs, keyed by node name.
pub fn configs(tick_ms: u64, port_offset: u16) -> Vec<(String, NodeConfig)> {
    let nodes = deployment();
    let loc = |port: u16| format!("localhost:{}", port + port_offset);
    let sites: BTreeMap<String, String> =
        nodes.iter().filter(|n| n.role == NodeRole::Site).map(|n| (n.name.to_string(), loc(n.port))).collect();
    nodes
        .iter()
        .map(|n| {
            let (role, peers) = match n.role {
                NodeRole::Expr { goal } => {
                    (RoleConfig::Expr { program: PathBuf::from("auction.orc"), goal: goal.to_string() }, sites.clone())
                }
                NodeRole::Site => (RoleConfig::Site { site: n.name.to_string(), state: None }, BTreeMap::new()),
            };
            let cfg = NodeConfig {
                name: Some(n.name.to_string()),
                self_loc: loc(n.port),
                clock_port: n.port + port_offset + CLOCK_OFFSET,
                tick_period_ms: tick_ms,
                allow_fast_ticks: tick_ms < orc_net::MIN_TICK_MS,
                spawn_ticker: true,
                role,
                peers,
            };
            (n.name.to_string(), cfg)
        })
        .collect()
}

pub fn write(dir: &Path, tick_ms: u64, port_offset: u16) -> Result<bool> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("auction.orc"), PROGRAM)?;
    for (name, cfg) in configs(tick_ms, port_offset) {
        let path = dir.join(format!("{}.toml", name.to_lowercase()));
        std::fs::write(&path, cfg.to_toml()).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(true)
}
