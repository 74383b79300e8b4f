mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use alias_census::corpus::{ExportFormat, HashAlgorithm};
use alias_census::harvester::BackendKind;

/// Mine, classify and summarize shell alias definitions.
#[derive(Debug, Parser)]
#[command(name = "alias-census", version, arg_required_else_help = true)]
pub struct Cli {
    /// Corpus store file [config: store; default: alias-census-store.jsonl]
    #[arg(long, global = true, value_name = "PATH")]
    pub store: Option<PathBuf>,
    /// Directory of knowledge-base files overriding the bundled ones [config: kb_dir]
    #[arg(long, global = true, value_name = "DIR")]
    pub kb_dir: Option<PathBuf>,
    /// Write JSON (JSON lines for tables) instead of CSV [config: json]
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for sampling and simulation [config: seed; default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Configuration file [default: $ALIAS_CENSUS_CONFIG, then ~/.config/alias-census/config]
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// More diagnostics on standard error; repeat for more
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest dotfiles from directories or harvested JSONL into the store
    Scan(ScanArgs),
    /// Re-label every alias in the store
    Classify,
    /// Print an analytics table
    Stats(StatsArgs),
    /// Write one table, or the whole store, as JSONL or CSV
    Export(ExportArgs),
    /// Load a whole-store dump into a new store
    Import(ImportArgs),
    /// Mine fix rules and apply them to command lines
    #[command(subcommand)]
    Suggest(SuggestCommand),
    /// Size-partitioned code search sampling
    #[command(subcommand)]
    Harvest(HarvestCommand),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Files or directories to walk
    pub paths: Vec<PathBuf>,
    /// Read every file instead of only dotfile-like names
    #[arg(long)]
    pub all: bool,
    /// File name glob to accept (repeatable; replaces the defaults)
    #[arg(long = "include", value_name = "GLOB")]
    pub include: Vec<String>,
    /// Harvested files as JSON lines; `-` reads standard input
    #[arg(long, value_name = "PATH")]
    pub from_jsonl: Vec<PathBuf>,
    /// Content hash for new stores: sha1 or sha256 [config: hash]
    #[arg(long)]
    pub hash: Option<HashAlgorithm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsTable {
    TopNames,
    TopCommands,
    TopArguments,
    Breakdown,
    Compression,
    Flows,
    ProvenanceFiles,
    ProvenanceWords,
    Practices,
    PracticeSummary,
    Sample,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub table: StatsTable,
    /// Rows to keep
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    /// Command for `breakdown`, or to restrict `compression`
    #[arg(long)]
    pub command: Option<String>,
    /// Argument sequences per command in `breakdown`
    #[arg(long, default_value_t = 10)]
    pub args: usize,
    /// Alias names listed per row in `breakdown`
    #[arg(long, default_value_t = 3)]
    pub aliases: usize,
    /// Histogram bins per decade for `compression`
    #[arg(long, default_value_t = 4)]
    pub bins: u32,
    /// Pipeline length for `flows`
    #[arg(long, default_value_t = 3)]
    pub length: usize,
    /// Minimum share of a source's weight for a `flows` edge
    #[arg(long, default_value_t = 0.10)]
    pub min_share: f64,
    /// Most frequent pipeline shapes kept by `flows` (0 keeps all)
    #[arg(long, default_value_t = 250)]
    pub shapes: usize,
    /// Comma-separated commands for `practices`
    #[arg(long, value_delimiter = ',')]
    pub commands: Vec<String>,
    /// Stop word file for `provenance-words` [config: stopwords]
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    /// Top commands sampled by `sample`
    #[arg(long, default_value_t = 50)]
    pub n_cmds: usize,
    /// Argument sequences per command sampled by `sample`
    #[arg(long, default_value_t = 10)]
    pub n_args: usize,
    /// Aliases per argument sequence sampled by `sample`
    #[arg(long, default_value_t = 3)]
    pub n_aliases: usize,
    /// Unique definitions drawn at random by `sample`
    #[arg(long, default_value_t = 200)]
    pub long_tail: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// repos, files, aliases, commands, arguments, labels, or `store` for a
    /// whole-store dump
    pub table: String,
    #[arg(long, default_value = "jsonl")]
    pub format: ExportFormat,
    /// Output file instead of standard output
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Dump written by `export store`; `-` reads standard input
    pub input: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SuggestCommand {
    /// Mine rules from the store and save them
    Build(RuleArgs),
    /// Suggest fixes for a command line
    Fix(FixArgs),
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    /// Minimum share of sudo uses for a sudo rule [config: min_support; default: 0.8]
    #[arg(long)]
    pub min_support: Option<f64>,
    /// Minimum occurrences for a sudo rule [config: min_count; default: 5]
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Rules file [config: rules; default: rules.jsonl beside the store]
    #[arg(long, value_name = "PATH")]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixArgs {
    /// The command line, as one argument or several words (after `--` if
    /// it has flags)
    #[arg(required = true, num_args = 1..)]
    pub line: Vec<String>,
    /// Suggestions to print
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    #[command(flatten)]
    pub rules: RuleArgs,
}

#[derive(Debug, Subcommand)]
pub enum HarvestCommand {
    /// Build a size-range plan, refined against the backend
    Plan(HarvestArgs),
    /// Run a plan and write the harvested files as JSON lines
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct HarvestArgs {
    /// Search term [config: term; default: alias]
    #[arg(long)]
    pub term: Option<String>,
    /// Largest file size in bytes [config: max_size; default: 29000]
    #[arg(long)]
    pub max_size: Option<u64>,
    /// Initial range width in bytes [config: step; default: 100]
    #[arg(long)]
    pub step: Option<u64>,
    /// Keep the uniform ranges
    #[arg(long)]
    pub no_refine: bool,
    /// simulated or github [config: backend; default: simulated]
    #[arg(long)]
    pub backend: Option<BackendKind>,
    /// API base URL for the github backend [config: api_url]
    #[arg(long, value_name = "URL")]
    pub api_url: Option<String>,
    /// Requests per minute [config: rate_limit; default: 30]
    #[arg(long)]
    pub rate_limit: Option<usize>,
    /// Files in the simulated population
    #[arg(long, default_value_t = 10_000)]
    pub sim_files: usize,
    /// Force a dense simulated range, as LO..HI:COUNT
    #[arg(long, value_name = "LO..HI:N")]
    pub sim_dense: Option<String>,
    /// Chance that a simulated request fails
    #[arg(long, default_value_t = 0.0)]
    pub sim_failure_rate: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub harvest: HarvestArgs,
    /// Plan written by `harvest plan --json` instead of planning afresh
    #[arg(long, value_name = "PATH")]
    pub plan: Option<PathBuf>,
    /// Where to write harvested files as JSON lines
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Also ingest the harvested files into the store
    #[arg(long)]
    pub ingest: bool,
}

/// An error caused by the invocation rather than by the program.
#[derive(Debug)]
pub struct UserError(pub String);

impl std::fmt::Display for UserError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

pub fn user_error(msg: impl Into<String>) -> anyhow::Error {
    UserError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            if code == 0 {
                let _ = e.print();
            } else {
                let _ = write!(io::stderr(), "{}", e.render());
            }
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)) {
                return ExitCode::SUCCESS;
            }
            let user = e.chain().any(|c| c.is::<UserError>());
            eprintln!("alias-census: error: {e:#}");
            ExitCode::from(if user { 1 } else { 2 })
        }
    }
}
