//! `benford`: solve the leading-block recursion, reproduce the convergence
//! table, dump the transition matrix, run the verification suites and analyze
//! leading blocks of integer sequences.
//!
//! Exit codes: 0 on success (or all checks passing), 1 on a computation or
//! verification failure, 2 on a usage error.

mod render;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use benford_core::analytic::{run_suite, Suite, SuiteBudget};
use benford_core::empirical::{
    frequency_report, generate_blocks, rearrangement_demo, Family, SequenceSpec,
};
use benford_core::fixed_point::{
    convergence_table, solve, Backend, SolveOptions, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};
use benford_core::MAX_VECTOR_DEPTH;
use clap::{Args, Parser, Subcommand, ValueEnum};

const MAX_DUMP_DEPTH: usize = 8;

#[derive(Parser)]
#[command(
    name = "benford",
    version,
    about = "Base-2 leading-block probabilities as a fixed point"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long, value_parser = parse_backend, default_value = "fast")]
    backend: Backend,
}

#[derive(Subcommand)]
enum Command {
    /// P10 estimates for k = 1..=kmax against log2(3/2)
    Table1 {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_VECTOR_DEPTH as i64))]
        kmax: u32,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Stationary block probabilities at depth k
    Solve {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Dump every transition matrix entry at depth k
    Matrix {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_DUMP_DEPTH as i64))]
        k: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Run identity checks; exits 1 if any fails
    Verify {
        #[arg(long, value_parser = parse_suite, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leading-block frequencies of an integer sequence
    Empirical {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Digits after the leading one
        #[arg(long, default_value_t = 1)]
        bits: usize,
        #[arg(long, default_value_t = 2)]
        base: u32,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: benford_core::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: benford_core::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: benford_core::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<benford_core::Error> for Failure {
    fn from(e: benford_core::Error) -> Self {
        Failure::Compute(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn solver_options(flags: &SolverFlags) -> Result<SolveOptions, Failure> {
    if flags.tolerance.is_nan() || flags.tolerance <= 0.0 {
        return Err(usage("--tolerance must be positive"));
    }
    if flags.max_iterations == 0 {
        return Err(usage("--max-iterations must be positive"));
    }
    Ok(SolveOptions {
        tolerance: flags.tolerance,
        max_iterations: flags.max_iterations,
    })
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Compute),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                // reader went away (e.g. `| head`): nothing left to deliver
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.context("writing to stdout").map_err(Failure::Compute),
            }
        }
    }
}

/// Returns whether everything that was checked passed.
fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Table1 {
            kmax,
            solver,
            output,
        } => {
            let options = solver_options(&solver)?;
            let rows = convergence_table(kmax as usize, &options, solver.backend)?;
            let text = match output.format {
                Format::Csv => render::table_csv(&rows),
                Format::Json => render::table_json(&rows).context("encoding table")?,
            };
            emit(&text, output.out.as_ref())?;
        }
        Command::Solve { k, solver, output } => {
            let options = solver_options(&solver)?;
            let limit = solver.backend.max_depth();
            if k == 0 || k > limit {
                return Err(usage(format!(
                    "--k must be in 1..={limit} for the {} backend, got {k}",
                    solver.backend
                )));
            }
            let report = solve(k, &options, solver.backend)?;
            let text = match output.format {
                Format::Csv => render::solve_csv(&report),
                Format::Json => render::solve_json(&report).context("encoding solution")?,
            };
            emit(&text, output.out.as_ref())?;
        }
        Command::Matrix { k, output } => {
            let entries = render::matrix_entries(k as usize)?;
            let text = match output.format {
                Format::Csv => render::matrix_csv(&entries),
                Format::Json => render::matrix_json(&entries).context("encoding matrix")?,
            };
            emit(&text, output.out.as_ref())?;
        }
        Command::Verify { suite, out } => {
            let reports = run_suite(&[suite], &SuiteBudget::default())?;
            emit(&render::verify_lines(&reports), out.as_ref())?;
            return Ok(reports.iter().all(|r| r.passed));
        }
        Command::Empirical {
            family,
            n,
            bits,
            base,
            output,
        } => {
            if family == Family::Rearranged {
                if n < 4 {
                    return Err(usage("--n must be at least 4 for the rearranged demo"));
                }
                let rows = render::demo_rows(&rearrangement_demo(n)?);
                let text = match output.format {
                    Format::Csv => render::demo_csv(&rows),
                    Format::Json => {
                        serde_json::to_string_pretty(&rows).context("encoding demo")? + "\n"
                    }
                };
                emit(&text, output.out.as_ref())?;
                return Ok(true);
            }
            let spec = SequenceSpec {
                family,
                count: usize::try_from(n).map_err(|_| usage("--n is too large"))?,
                depth: bits,
                base,
            };
            spec.validate().map_err(|e| usage(e.to_string()))?;
            let report = frequency_report(generate_blocks(&spec)?, bits, base)?;
            let text = match output.format {
                Format::Csv => render::empirical_csv(&report),
                Format::Json => {
                    serde_json::to_string_pretty(&render::empirical_output(
                        family.name(),
                        spec.count,
                        &report,
                    ))
                    .context("encoding report")?
                        + "\n"
                }
            };
            emit(&text, output.out.as_ref())?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
