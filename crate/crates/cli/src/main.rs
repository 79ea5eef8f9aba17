//! `pralab`: product replacement graphs, the redundant-tuple connector and
//! spread computations for PSL(2,q) and PGL(2,q), q odd.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on bad input
//! or an exhausted budget.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pralab::connector::DEFAULT_SEARCH_CAP;
use pralab::graph::DEFAULT_STATE_BUDGET;
use pralab::spread::{DEFAULT_RESTARTS, DEFAULT_SET_BUDGET};
use pralab::GroupKind;

use crate::commands::VerificationFailed;
use crate::config::{CommandKind, Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "pralab", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Group family: psl or pgl.
    #[arg(long, global = true, default_value = "psl", value_parser = parse_kind)]
    group: GroupKind,
    /// Field order, an odd prime power.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Tuple length [default: 3 for components, 4 for walk and connect].
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Use the extended graph with swaps and inversions (default).
    #[arg(long, global = true, overrides_with = "plain")]
    extended: bool,
    /// Use only the multiplication moves.
    #[arg(long, global = true, overrides_with = "extended")]
    plain: bool,
    /// Random seed [default: 0, or the acceptance seed for verify].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Walk length.
    #[arg(long, global = true, default_value_t = 100)]
    steps: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Largest packed state space an exhaustive component run may touch.
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_BUDGET)]
    state_budget: u64,
    /// Largest number of m-sets an exhaustive spread scan may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_SET_BUDGET)]
    search_budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit timestamps and timings so equal inputs give identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Tuple of matrices, e.g. "1,1,0,1;1,0,1,1" (entries a,b,c,d; ';' between matrices).
    #[arg(long, global = true)]
    tuple: Option<String>,
    /// Draw a random generating tuple from --seed.
    #[arg(long, global = true)]
    random: bool,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List elements with order and type, or count them with --census.
    Classify {
        #[arg(long)]
        census: bool,
    },
    /// Closure and classification of the subgroup generated by --tuple.
    Subgroup,
    /// Connected components of the product replacement graph.
    Components,
    /// Product replacement walk from --tuple or a random tuple.
    Walk {
        /// Number of independent walks; above 1, report counts and a
        /// chi-square statistic.
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// Nielsen moves from a generating 4-tuple to a redundant one.
    Connect {
        /// Accept k > 4 by working on a generating 4-prefix.
        #[arg(long)]
        experimental: bool,
        /// State cap of the searches used inside the pipeline.
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        search_cap: usize,
    },
    /// Spread bounds: exhaustive lower bound, blocking-set search, or both.
    Spread {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Mode::Lower)]
        mode: Mode,
        /// Restarts of the blocking-set search.
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: u64,
        /// Scan every first element instead of class representatives.
        #[arg(long)]
        no_reduce: bool,
    },
    /// Run the acceptance suite.
    Verify {
        /// Criterion numbers to run, comma-separated.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Continue after a failing criterion.
        #[arg(long)]
        keep_going: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Lower,
    Upper,
    Exact,
}

fn parse_kind(s: &str) -> Result<GroupKind, String> {
    s.parse().map_err(|e: pralab::Error| e.to_string())
}

impl Cli {
    fn config(&self) -> RunConfig {
        let c = &self.common;
        let command = match self.command {
            Command::Classify { .. } => CommandKind::Classify,
            Command::Subgroup => CommandKind::Subgroup,
            Command::Components => CommandKind::Components,
            Command::Walk { .. } => CommandKind::Walk,
            Command::Connect { .. } => CommandKind::Connect,
            Command::Spread { .. } => CommandKind::Spread,
            Command::Verify { .. } => CommandKind::Verify,
        };
        let default_k = match command {
            CommandKind::Walk | CommandKind::Connect => 4,
            _ => 3,
        };
        let default_seed = match command {
            CommandKind::Verify => pralab::verify::VerifyOptions::default().seed,
            _ => 0,
        };
        RunConfig {
            command,
            group: c.group,
            q: c.q,
            k: c.k.unwrap_or(default_k),
            extended: !c.plain,
            seed: c.seed.unwrap_or(default_seed),
            steps: c.steps,
            workers: c.workers,
            state_budget: c.state_budget,
            search_budget: c.search_budget,
            format: c.format,
            deterministic: c.deterministic,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = cli.config();
    let result = if cli.common.show_config {
        serde_json::to_string(&cfg)
            .map(|s| println!("{s}"))
            .map_err(Into::into)
    } else {
        commands::run(&cfg, &cli)
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("verification failed: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(hint) = commands::hint(&e) {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(2)
        }
    }
}
