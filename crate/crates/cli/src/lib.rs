//! Command-line driver and HTTP service for the SNQAM engine.

pub mod config;
pub mod server;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{ArgAction, Args, Parser, Subcommand};
use snqam_core::corpus::FilterConfig;
use snqam_core::forest::DEFAULT_SEED;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "snqam", version, about = "News quality features, analyses and scoring")]
pub struct Cli {
    /// TOML file with defaults for model, lexicons, port and CORS.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Lexicon directory.
    #[arg(long, global = true, env = "SNQAM_LEXICONS", value_name = "DIR")]
    pub lexicons: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the feature matrix of a corpus as CSV.
    Extract(ExtractArgs),
    /// Fit a quality model and write it as JSON.
    Calibrate(CalibrateArgs),
    /// Score drafts against a model; one JSON response per draft.
    Score(ScoreArgs),
    /// Correlation, drift and classification reports.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run the HTTP scoring service.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Per-user feature/quality rank correlation.
    Corr(CorrArgs),
    /// Period-mean change points and trend similarity.
    Drift(DriftArgs),
    /// Random-forest cross-validation over feature sets.
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// JSON-lines corpus.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Fail on the first malformed line (the default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Skip malformed lines and report how many were skipped.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got {s:?}"))?;
    let date = |t: &str| -> Result<Option<NaiveDate>, String> {
        if t.is_empty() {
            Ok(None)
        } else {
            NaiveDate::parse_from_str(t, "%Y-%m-%d")
                .map(Some)
                .map_err(|e| format!("{t:?}: {e}"))
        }
    };
    let w = Window {
        start: date(a)?,
        end: date(b)?,
    };
    if let (Some(s), Some(e)) = (w.start, w.end) {
        if s > e {
            return Err(format!("window start {s} is after end {e}"));
        }
    }
    Ok(w)
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("{s:?}: {e}"))
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Drop posts younger than this many days.
    #[arg(long, default_value_t = 7)]
    pub min_age_days: i64,
    /// Keep posts published within START..END (dates, either side optional).
    #[arg(long, value_name = "START..END", value_parser = parse_window)]
    pub window: Option<Window>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub originals_only: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub drop_lottery: bool,
    /// Reference time for the age rule, RFC 3339 (default: now).
    #[arg(long, value_parser = parse_time)]
    pub now: Option<DateTime<Utc>>,
}

impl FilterArgs {
    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            min_age_days: self.min_age_days,
            window_start: self.window.and_then(|w| w.start),
            window_end: self.window.and_then(|w| w.end),
            originals_only: self.originals_only,
            drop_lottery: self.drop_lottery,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ForestArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output CSV (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Append the eight facet columns.
    #[arg(long)]
    pub with_facets: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Accounts whose posts are labelled VERY_GOOD; the rest are TYPICAL.
    #[arg(long, value_delimiter = ',', required = true, value_name = "ACCOUNT,...")]
    pub very_good: Vec<String>,
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
    /// Timestamp recorded in the model, RFC 3339 (default: now).
    #[arg(long, value_parser = parse_time)]
    pub created_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("draft").required(true).args(["text", "requests"]))]
pub struct ScoreArgs {
    #[arg(long, env = "SNQAM_MODEL", value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Draft text to score.
    #[arg(long)]
    pub text: Option<String>,
    /// JSON-lines file of score requests (`{"text", "has_image", "has_video"}`).
    #[arg(long, value_name = "PATH")]
    pub requests: Option<PathBuf>,
    #[arg(long)]
    pub has_image: bool,
    #[arg(long)]
    pub has_video: bool,
    /// Percentile below which a facet gets a suggestion.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Guideline catalog overriding the built-in one.
    #[arg(long, value_name = "PATH")]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Write the JSON report here; the text table always goes to stdout.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CorrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    /// Per-user top-k used for the common-feature intersection.
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DriftArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    /// Restrict to one account (default: every post).
    #[arg(long)]
    pub account: Option<String>,
    #[arg(long, default_value_t = 30)]
    pub period_days: u32,
    /// Write the plot-ready period series as CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long, value_delimiter = ',', required = true, value_name = "ACCOUNT,...")]
    pub very_good: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "SNQAM_MODEL", value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, env = "SNQAM_PORT")]
    pub port: Option<u16>,
    /// Interface to bind (default 127.0.0.1).
    #[arg(long)]
    pub bind: Option<String>,
    /// Allowed CORS origin; repeatable, `*` for any.
    #[arg(long = "cors-origin", value_name = "ORIGIN")]
    pub cors_origins: Vec<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub catalog: Option<PathBuf>,
}

/// Why a command failed, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env("SNQAM_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging();
    match commands::execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            EXIT_DATA
        }
    }
}
