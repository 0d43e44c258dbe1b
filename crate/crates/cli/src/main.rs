//! `flagval`: batch front-end for AF checks, c-pair analysis, valuation
//! reconstruction and the exhaustive verification suites.
//!
//! Reports go to stdout (or `--out`) as JSON; a one-line summary goes to
//! stderr. Exit codes: 0 certified, 10 refuted, 11 exceptional, 2 input
//! error, 3 budget exceeded.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use report::{Failure, Report};

#[derive(Debug, Parser)]
#[command(name = "flagval", version, about = "Abelian flag functions, c-pairs and valuation reconstruction")]
struct Cli {
    /// Worker threads; FLAGVAL_JOBS takes precedence. Defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case", rename_all_fields = "camelCase")]
pub enum Command {
    /// Decide the AF property of a function file.
    CheckAf {
        file: PathBuf,
        /// Window box radius (integer lattices only).
        #[arg(long)]
        window: Option<i64>,
        /// Re-sample a depth-k table at this depth.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Classify a rank-2 function, or reduce a rank-3 one.
    Classify { file: PathBuf },
    /// Check the c-pair condition for two function or logarithmic function files.
    Cpair {
        f1: PathBuf,
        f2: PathBuf,
        /// Pool degree for logarithmic functions.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Largest number of pool pairs to test.
        #[arg(long, default_value_t = 1 << 22)]
        budget: u64,
    },
    /// Search the span of a c-pair for an AF element.
    FindAf {
        f1: PathBuf,
        f2: PathBuf,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Coefficients are drawn from [-bound, bound].
        #[arg(long, default_value_t = 2)]
        coefficient_bound: i64,
    },
    /// Reconstruct the valuation behind a logarithmic function file.
    Reconstruct {
        file: PathBuf,
        /// Degree bound of the element pool.
        #[arg(long, default_value_t = 3)]
        pool_degree: usize,
        /// Sampled pairs for the axiom checks.
        #[arg(long, default_value_t = 10_000)]
        axiom_pairs: usize,
    },
    /// Run an exhaustive or sampled verification suite.
    Verify {
        /// One of z2-p, red2-p, 2-coeff, fano, agf, restr3-sample.
        proposition: String,
        #[arg(long)]
        q: u64,
        /// Largest instance count an exhaustive run may enumerate.
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
        /// Instance count for sampled suites.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0x00f1_a9fa)]
        seed: u64,
    },
}

/// FLAGVAL_JOBS beats `--jobs`, which beats the core count.
fn resolve_jobs(flag: Option<usize>) -> Result<usize, Failure> {
    match std::env::var("FLAGVAL_JOBS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Usage(format!("FLAGVAL_JOBS must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(flag.filter(|&n| n > 0).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))),
    }
}

fn run(cli: &Cli) -> Result<(Report, String), Failure> {
    let jobs = resolve_jobs(cli.jobs)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Failure::Usage(e.to_string()))?;
    let start = Instant::now();
    let (outcome, inputs) = pool.install(|| commands::dispatch(&cli.command))?;
    let mut options = serde_json::to_value(&cli.command).unwrap();
    let command = options["name"].take();
    options.as_object_mut().unwrap().remove("name");
    let report = Report {
        command: command.as_str().unwrap_or_default().to_string(),
        options,
        inputs,
        kind: outcome.kind,
        exit_code: outcome.exit_code,
        result: outcome.result,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok((report, outcome.summary))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, summary)) => {
            let mut text = serde_json::to_string_pretty(&report).unwrap();
            text.push('\n');
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("flagval: cannot write report: {e}");
                return ExitCode::from(report::EXIT_INPUT);
            }
            eprintln!("{}: {} ({} ms)", report.command, summary, report.wall_time_ms);
            ExitCode::from(report.exit_code)
        }
        Err(failure) => {
            eprintln!("flagval: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
