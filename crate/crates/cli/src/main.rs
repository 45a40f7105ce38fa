mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{DatasetEntry, RunConfig, OUTPUT_ENV};

/// Bad input on the operator's side: exit code 1 instead of 2.
#[derive(Debug)]
pub struct UserError(String);

impl std::fmt::Display for UserError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

pub fn user(msg: impl Into<String>) -> anyhow::Error {
    UserError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "tmfs", version, about = "Tsetlin Machine feature ranking benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Train one machine per dataset; report test accuracy and macro-F1.
    Train,
    /// Score features with every selected method.
    Rank,
    /// Retrain on pruned inputs and write pruning curves (resumable).
    Eval,
    /// Tallies, tradeoff tables, correlations, dendrogram and heatmaps.
    Analyze {
        /// Result directory; `<output>/eval` by default.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Markdown summary of an evaluation directory.
    Report {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Flags override the matching config keys.
#[derive(Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output root (beats $TMFS_OUTPUT and the config).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Replaces the configured datasets; repeatable.
    #[arg(short, long = "dataset", global = true)]
    datasets: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    bins: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    num_clauses: Option<usize>,
    /// Comma-separated method ids, or `all`.
    #[arg(long, global = true, value_delimiter = ',')]
    methods: Vec<String>,
    /// Comma-separated protocols, or `all`.
    #[arg(long, global = true, value_delimiter = ',')]
    protocols: Vec<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    k_grid: Vec<usize>,
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if !self.datasets.is_empty() {
            cfg.datasets = self.datasets.iter().map(|d| DatasetEntry::named(d)).collect();
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.bins = self.bins.unwrap_or(cfg.bins);
        cfg.epochs = self.epochs.unwrap_or(cfg.epochs);
        cfg.num_clauses = self.num_clauses.unwrap_or(cfg.num_clauses);
        if !self.methods.is_empty() {
            cfg.methods = self.methods;
        }
        if !self.protocols.is_empty() {
            cfg.protocols = self.protocols;
        }
        if !self.k_grid.is_empty() {
            cfg.k_grid = Some(self.k_grid);
        }
        cfg.parallelism = self.parallelism.or(cfg.parallelism);
        cfg.data_dir = self.data_dir.or(cfg.data_dir);
        if let Some(o) = self.output {
            cfg.output_dir = o;
        } else if let Some(o) = std::env::var_os(OUTPUT_ENV).filter(|o| !o.is_empty()) {
            cfg.output_dir = o.into();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.overrides.resolve()?;
    let root = cfg.output_dir.clone();
    match cli.command {
        Command::Analyze { input } => {
            commands::analyze(&root, input.as_deref())?;
            commands::log_run(&root, "analyze", "-")
        }
        Command::Report { input } => {
            commands::report(&root, input.as_deref())?;
            commands::log_run(&root, "report", "-")
        }
        cmd => {
            cfg.validate()?;
            let (name, dir) = match cmd {
                Command::Train => ("train", commands::train(&cfg)?),
                Command::Rank => ("rank", commands::rank(&cfg)?),
                _ => ("eval", commands::eval(&cfg)?),
            };
            eprintln!("wrote {}", dir.display());
            commands::log_run(&root, name, &cfg.hash()?)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UserError>() {
            return 1;
        }
        if let Some(core) = cause.downcast_ref::<tmfs_core::Error>() {
            return match core {
                tmfs_core::Error::InvalidInput(_)
                | tmfs_core::Error::Parse { .. }
                | tmfs_core::Error::Io { .. }
                | tmfs_core::Error::Dimension { .. } => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.overrides.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
