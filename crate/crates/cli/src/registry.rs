//! Named models and site families the CLI knows about.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use orc_core::analysis::{Definitions, PropSet};
use orc_core::semantics::SiteBehavior;
use orc_core::sim::GlobalSystem;
use orc_core::{Const, Time};

pub struct Model {
    pub init: GlobalSystem,
    pub props: Arc<dyn PropSet>,
    pub defs: Definitions,
}

/// Parses a delay set such as `1/10`, `{0, inf}` or `0,1/4`.
pub fn delay_set(s: &str) -> Result<Vec<Time>> {
    let body = s.trim().trim_start_matches('{').trim_end_matches('}');
    let ds = body
        .split(',')
        .map(|t| t.trim().parse::<Time>().with_context(|| format!("in delay set `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if ds.is_empty() {
        bail!("empty delay set");
    }
    Ok(ds)
}

/// Resolves `name:DS`.
pub fn initial(spec: &str) -> Result<Model> {
    let (name, ds) = spec.split_once(':').ok_or_else(|| anyhow!("expected NAME:DELAYS, got `{spec}`"))?;
    match name {
        "auction" => Ok(Model {
            init: orc_auction::initial(delay_set(ds)?),
            props: Arc::new(orc_auction::AuctionProps),
            defs: orc_auction::definitions(),
        }),
        _ => bail!("unknown model `{name}`; known: auction"),
    }
}

/// Site behaviors by name, with their default initial states.
pub fn site(name: &str) -> Option<(Arc<dyn SiteBehavior>, Const)> {
    orc_auction::behavior(name, &orc_auction::Setup::default())
}

/// A named site with its behavior and initial state.
pub type NamedSite = (String, Arc<dyn SiteBehavior>, Const);

/// Every site of a family, by name.
pub fn family(name: &str) -> Result<Vec<NamedSite>> {
    match name {
        "auction" => Ok(orc_auction::deployment()
            .into_iter()
            .filter(|n| n.role == orc_auction::NodeRole::Site)
            .filter_map(|n| site(n.name).map(|(b, s)| (n.name.to_string(), b, s)))
            .collect()),
        _ => bail!("unknown site family `{name}`; known: auction"),
    }
}
