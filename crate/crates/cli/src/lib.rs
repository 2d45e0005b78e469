//! Operator entry point for the soft-attribute pipeline.
//!
//! Every subcommand resolves a [`RunConfig`] (defaults, then `--config` TOML,
//! then flags or `SOFTATTR_*` variables), prints it, and writes its artifacts
//! atomically under the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod workspace;

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use softattr::pipeline::Method;

pub use config::{ConfigArgs, RunConfig};
pub use error::{CliError, Result};
use workspace::Workspace;

#[derive(Debug, Parser)]
#[command(name = "softattr", version, about = "Soft-attribute scoring, evaluation and annotation")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the corpus files and report their sizes.
    Ingest,
    /// Build the item and review BM25 indexes.
    Index,
    /// Train item and user embeddings from ratings.
    Embed,
    /// Rank every item for one attribute and write the ranking as CSV.
    Score {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        attribute: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Gamma per tag attribute on the binary tag collection.
    EvalMovielens {
        /// Repeatable; defaults to every method except swd.
        #[arg(long = "method")]
        methods: Vec<Method>,
    },
    /// Mean weighted gamma per method on the judgments; swd is cross-validated.
    EvalSoftattr {
        /// Repeatable; defaults to every method.
        #[arg(long = "method")]
        methods: Vec<Method>,
    },
    /// Inter-rater agreement per attribute with terciles.
    Agree,
    /// Mean bucket sizes per attribute.
    Buckets,
    /// Cross-validated SWD quality against the number of training raters.
    Curve {
        /// Comma-separated rater counts; defaults to steps of 5 up to the largest fold.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 25)]
        reps: usize,
    },
    /// Draw annotation tasks offline for one rater.
    SampleTasks {
        #[arg(long)]
        rater: String,
        /// Comma-separated seen item ids.
        #[arg(long, value_delimiter = ',', conflicts_with = "seen_file")]
        seen: Vec<String>,
        /// File with one seen item id per line.
        #[arg(long)]
        seen_file: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the annotation HTTP service.
    Serve {
        #[arg(long, env = "SOFTATTR_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Write a synthetic corpus with hidden attributes into the data directory.
    Synth,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Index => "index",
            Command::Embed => "embed",
            Command::Score { .. } => "score",
            Command::EvalMovielens { .. } => "eval-movielens",
            Command::EvalSoftattr { .. } => "eval-softattr",
            Command::Agree => "agree",
            Command::Buckets => "buckets",
            Command::Curve { .. } => "curve",
            Command::SampleTasks { .. } => "sample-tasks",
            Command::Serve { .. } => "serve",
            Command::Synth => "synth",
        }
    }
}

/// Runs one parsed invocation; the returned text is the human-readable report.
pub fn run(cli: Cli) -> Result<String> {
    let cfg = cli.config.resolve()?;
    eprintln!("# softattr {} (seed {})\n{}", cli.command.name(), cfg.seed, cfg.to_toml());
    let ws = Workspace::new(cfg);
    match cli.command {
        Command::Ingest => commands::ingest(&ws),
        Command::Index => commands::index(&ws),
        Command::Embed => commands::embed(&ws),
        Command::Score { method, attribute, output } => commands::score(&ws, method, &attribute, output),
        Command::EvalMovielens { methods } => {
            let methods = if methods.is_empty() {
                Method::ALL.into_iter().filter(|m| *m != Method::Swd).collect()
            } else {
                methods
            };
            commands::eval_movielens(&ws, &methods)
        }
        Command::EvalSoftattr { methods } => {
            let methods = if methods.is_empty() { Method::ALL.to_vec() } else { methods };
            commands::eval_softattr(&ws, &methods)
        }
        Command::Agree => commands::agree(&ws),
        Command::Buckets => commands::buckets(&ws),
        Command::Curve { sizes, reps } => commands::curve(&ws, sizes, reps),
        Command::SampleTasks { rater, seen, seen_file, count, output } => {
            let seen = match seen_file {
                Some(p) => std::fs::read_to_string(&p)
                    .map_err(|e| CliError::io(&p, e))?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_string)
                    .collect(),
                None => seen,
            };
            commands::sample_tasks(&ws, &rater, seen, count, output)
        }
        Command::Serve { addr } => commands::serve(&ws, addr).map(|()| String::new()),
        Command::Synth => commands::synth(&ws.cfg),
    }
}
