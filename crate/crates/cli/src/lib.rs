//! The `c2u` command line: extraction, view compaction, diagram
//! generation, linting, metrics and corpus evaluation.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | error: bad arguments or configuration, unreadable input, or any error event during the run |
//! | 2    | the extracted IR has no entities |
//! | 3    | `lint`: the diagram had violations, all mechanically fixable |
//! | 4    | `lint`: the diagram has violations with no mechanical fix |

pub mod commands;
pub mod config;
pub mod evaluate;
pub mod pipeline;
pub mod tables;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const EMPTY_IR: i32 = 2;
    pub const CORRECTED: i32 = 3;
    pub const UNCORRECTABLE: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "c2u", version, about = "Generate and evaluate PlantUML diagrams from source repositories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// TOML run configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// Model backend: mock or api.
    #[arg(long, env = "C2U_BACKEND")]
    pub backend: Option<config::BackendKind>,
    /// Scripted responses for the mock backend, one JSON file per script.
    #[arg(long, value_name = "DIR")]
    pub scripts: Option<PathBuf>,
    /// Zero event timestamps so identical inputs give identical outputs.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract an IR from a repository.
    Extract {
        repo: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Skip normalization.
        #[arg(long)]
        raw: bool,
        /// Project name; defaults to the repository directory name.
        #[arg(long)]
        name: Option<String>,
        /// Restrict extraction to these languages.
        #[arg(long, value_delimiter = ',')]
        languages: Vec<String>,
    },
    /// Compact an IR into diagram views.
    View {
        ir: PathBuf,
        /// Diagram type, or `all`.
        #[arg(long, default_value = "all")]
        diagram: String,
        #[arg(long, default_value = "views")]
        out: PathBuf,
        /// Also write the per-element ranking as `explain_<type>.csv`.
        #[arg(long)]
        explain: bool,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Run the agent pipeline and write diagrams.
    Generate {
        /// Repository directory or IR file.
        input: PathBuf,
        #[arg(long, default_value = "all")]
        diagram: String,
        /// Repository root, required when INPUT is an IR file.
        #[arg(long)]
        repo: Option<PathBuf>,
        /// Dependency sources to summarize for the generators.
        #[arg(long, value_name = "DIR")]
        deps: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        concurrency: Option<usize>,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Lint a PlantUML file.
    Lint {
        file: PathBuf,
        #[arg(long = "type")]
        diagram_type: String,
        /// Rewrite the file with mechanical fixes.
        #[arg(long)]
        fix: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Score generated diagrams against an IR.
    Metrics {
        #[arg(long)]
        ir: PathBuf,
        /// Directory searched recursively for `.puml` files.
        #[arg(long)]
        diagrams: PathBuf,
        /// Diagram type of every file; by default taken from each file's directory name.
        #[arg(long = "type")]
        diagram_type: Option<String>,
        /// Language column; defaults to the IR's languages.
        #[arg(long)]
        label: Option<String>,
        #[arg(long, default_value = "metrics")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Generate and score every diagram type for every corpus project.
    Evaluate {
        /// Run configuration listing the corpus projects.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep finished observations from an earlier run.
        #[arg(long)]
        resume: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::ERROR } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::ERROR
        }
    }
}
