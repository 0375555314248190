//! `abstf` — regression maintenance for MiniLang projects: snapshot a
//! baseline, then select, re-run, and synthesize tests as the code
//! changes.

mod commands;
mod config;

use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use config::ProjectConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(
    name = "abstf",
    version,
    about = "Regression maintenance for MiniLang projects",
    arg_required_else_help = true
)]
struct Cli {
    /// Project root directory.
    #[arg(long, global = true, default_value = ".")]
    project: PathBuf,

    /// Report output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Interpreter step limit per test.
    #[arg(long, global = true)]
    step_limit: Option<u64>,

    /// Synthesis search domain, inclusive, as LO..HI.
    #[arg(long, global = true, value_parser = parse_domain)]
    domain: Option<(i64, i64)>,

    /// Synthesis trials per target.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Watch poll interval in seconds.
    #[arg(long, global = true)]
    interval: Option<f64>,

    /// In watch mode, take a fresh baseline after each triggered run.
    #[arg(long, global = true)]
    auto_baseline: bool,

    /// Stop watch mode after N polls (testing hook).
    #[arg(long, global = true, hide = true)]
    max_ticks: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a default abstf.toml into the project root.
    Init,
    /// Parse the project, run the suite, and store the baseline.
    Snapshot,
    /// One-shot pipeline against the stored baseline.
    Run,
    /// Poll for changes and run the pipeline on each one.
    Watch,
    /// Show which tests the current edit selects (no execution).
    Select,
    /// Show call-site counts and impacted functions for the current edit.
    Impact,
    /// Traceability matrix and completeness findings.
    Trace,
    /// Synthesize tests for uncovered dangerous edges.
    Gen,
    /// Re-render the last stored report.
    Report,
}

fn parse_domain(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad domain low `{lo}`: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad domain high `{hi}`: {e}"))?;
    if lo > hi {
        return Err(format!("empty domain {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    commands::ensure_project_dir(&cli.project)?;
    let mut config = ProjectConfig::load(&cli.project)?;
    if let Some(limit) = cli.step_limit {
        config.step_limit = limit;
    }
    if let Some((lo, hi)) = cli.domain {
        config.domain_lo = lo;
        config.domain_hi = hi;
    }
    if let Some(budget) = cli.budget {
        config.budget = budget;
    }
    if let Some(interval) = cli.interval {
        config.interval_secs = interval;
    }
    config.validate()?;

    let layout = config.layout(&cli.project);
    let settings = config.settings();
    match cli.command {
        Command::Init => commands::init(&cli.project, &config),
        Command::Snapshot => commands::snapshot(&layout, &settings),
        Command::Run => commands::run(&layout, &settings, cli.format),
        Command::Watch => commands::watch(
            &layout,
            &settings,
            Duration::from_secs_f64(config.interval_secs),
            cli.auto_baseline,
            cli.max_ticks,
        ),
        Command::Select => commands::select(&layout, cli.format),
        Command::Impact => commands::impact(&layout, cli.format),
        Command::Trace => commands::trace(&layout, cli.format),
        Command::Gen => commands::gen(&layout, &settings, cli.format),
        Command::Report => commands::report(&layout, cli.format),
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("abstf: {message}");
            std::process::exit(commands::EXIT_FATAL);
        }
    }
}
