//! `orc`: run Orc programs and nodes, and analyze the auction model.

mod analyze;
mod deploy;
mod local;
mod registry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Exit codes: 0 success, holds or found; 1 counterexample or not found;
/// 2 usage, configuration or runtime errors.
#[derive(Parser)]
#[command(name = "orc", version, about = "Orc orchestration engine, distributed runtime and model checker")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Initial state, e.g. `auction:1/10` or `auction:0,inf`.
    #[arg(long)]
    initial: String,
    /// Let socket creation fail nondeterministically.
    #[arg(long, value_enum, default_value = "on")]
    explore_socket_errors: Switch,
    /// Explore every interleaving of expression-level moves.
    #[arg(long)]
    interleave: bool,
    /// Instantaneous steps allowed per closure before a Zeno suspicion.
    #[arg(long, default_value_t = 100_000)]
    fuel: usize,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a program in one local configuration, advancing time by
    /// the earliest pending event.
    Run {
        file: PathBuf,
        /// Host a registered site family locally (e.g. `auction`).
        #[arg(long)]
        sites: Option<String>,
        /// Stop once this much time has elapsed.
        #[arg(long, default_value = "100")]
        until: String,
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
    },
    /// Run one node of a deployment.
    Node {
        config: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: usize,
    },
    /// Send tick tokens to a node's clock port.
    Ticker {
        #[arg(long, default_value = "localhost")]
        host: String,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value_t = 1000)]
        period: u64,
    },
    /// Time-bounded LTL model checking.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        /// A named formula or an LTL formula over the model's propositions.
        #[arg(long)]
        formula: String,
        #[arg(long, default_value = "15")]
        bound: String,
        #[arg(long, default_value_t = 5_000_000)]
        node_cap: usize,
        /// Explore to multiples of this time first and stop at a
        /// counterexample that does not depend on the bound.
        #[arg(long)]
        deepen: Option<String>,
    },
    /// Earliest time at which a state predicate holds.
    FindEarliest {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        prop: String,
        #[arg(long, default_value = "inf")]
        bound: String,
        #[arg(long, default_value_t = 5_000_000)]
        node_cap: usize,
    },
    /// Print one run of the model.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value = "inf")]
        bound: String,
        /// Pick among branches at random instead of always the first.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write node configs for a local six-node auction deployment.
    DeployConfig {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        tick_ms: u64,
        /// Offset added to every default port.
        #[arg(long, default_value_t = 0)]
        port_offset: u16,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Run { file, sites, until, fuel } => local::run(&file, sites.as_deref(), &until, fuel),
        Cmd::Node { config, fuel } => local::node(&config, fuel),
        Cmd::Ticker { host, port, period } => local::ticker(&host, port, period),
        Cmd::Mc { model, formula, bound, node_cap, deepen } => {
            analyze::mc(&model.into(), &formula, &bound, node_cap, deepen.as_deref())
        }
        Cmd::FindEarliest { model, prop, bound, node_cap } => {
            analyze::find_earliest(&model.into(), &prop, &bound, node_cap)
        }
        Cmd::Simulate { model, steps, bound, seed } => analyze::simulate(&model.into(), steps, &bound, seed),
        Cmd::DeployConfig { dir, tick_ms, port_offset } => deploy::write(&dir, tick_ms, port_offset),
    };
    match r {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

impl From<ModelArgs> for analyze::Setup {
    fn from(a: ModelArgs) -> Self {
        analyze::Setup {
            initial: a.initial,
            socket_errors: a.explore_socket_errors == Switch::On,
            interleave: a.interleave,
            fuel: a.fuel,
            output: a.output,
        }
    }
}
