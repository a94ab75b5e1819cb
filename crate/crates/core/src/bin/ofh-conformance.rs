//! Command-line front end: list the catalog, run a campaign, render a report.
//!
//! Exit codes: 0 when every selected case passes, 1 when any case fails or
//! is blocked, 2 for usage, profile, selection or I/O errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use ofh_conformance::runner::{
    output_root, render_report, run_campaign, write_run, Category, LabProfile, ReportFormat,
    TestReport, CATALOG, OUT_ENV,
};

#[derive(Parser)]
#[command(
    name = "ofh-conformance",
    version,
    about = "Open fronthaul O-RU conformance harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the test catalog, one case per line.
    List,
    /// Run the selected cases (all when no --case is given).
    Run {
        /// Lab profile (TOML); built-in defaults when omitted.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Case id to run; repeatable.
        #[arg(long = "case", value_name = "ID")]
        cases: Vec<String>,
        /// Overrides the profile seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output root; a directory per run is created inside it.
        #[arg(long, env = OUT_ENV)]
        out: Option<PathBuf>,
    },
    /// Render a stored run.
    Report {
        /// Run directory holding report.json.
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Structured,
    Human,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Structured => ReportFormat::Structured,
            Format::Human => ReportFormat::Human,
        }
    }
}

fn list() -> ExitCode {
    let mut out = std::io::stdout().lock();
    for c in CATALOG.iter() {
        let category = match c.category {
            Category::Mandatory => "M",
            Category::ConditionalMandatory => "CM",
        };
        let plane = format!("{:?}", c.plane);
        // A closed pipe (`list | head`) ends the listing quietly.
        if writeln!(out, "{:<10} {plane:<3} {category:<2} {}", c.id, c.title).is_err() {
            break;
        }
    }
    ExitCode::SUCCESS
}

fn run(
    profile: Option<&Path>,
    cases: &[String],
    seed: Option<u64>,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let mut lab = match profile {
        Some(p) => LabProfile::load(p)?,
        None => LabProfile::default(),
    };
    if let Some(s) = seed {
        lab.seed = s;
    }
    let campaign = run_campaign(&lab, cases)?;
    let dir = write_run(&output_root(out), &campaign).context("writing run directory")?;
    print!("{}", render_report(&campaign.report, ReportFormat::Human));
    eprintln!("report written to {}", dir.display());
    Ok(if campaign.report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn report(input: &Path, format: Format) -> anyhow::Result<ExitCode> {
    let r = TestReport::load(&input.join("report.json"))?;
    print!("{}", render_report(&r, format.into()));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            // Value errors omit the usage line; every usage error shows it.
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::List => Ok(list()),
        Command::Run {
            profile,
            cases,
            seed,
            out,
        } => run(profile.as_deref(), &cases, seed, out.as_deref()),
        Command::Report { input, format } => report(&input, format),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
