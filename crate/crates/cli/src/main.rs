use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gcs_cli::{corpus, CliError, Options, ProblemError, ProblemFile, Report};

/// Generalized conditional symmetries of evolution equations.
#[derive(Debug, Parser)]
#[command(name = "gcs", version)]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed of the sampling RNG (decimal or 0x-prefixed hex).
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Number of sample points of the zero test.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Relative threshold of the zero test.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// RK4 step for integrating reduced systems.
    #[arg(long, global = true, default_value_t = 1e-3)]
    step: f64,
    /// Integration interval as START:END.
    #[arg(long, global = true, value_parser = parse_span, default_value = "0:0.05")]
    tspan: (f64, f64),
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the operator is a conditional symmetry, three independent ways.
    Check { problem: String },
    /// Reduce the equation with the ansatz to a system of ODEs.
    Reduce { problem: String },
    /// Convert the operator to reduced and canonical form.
    Convert { problem: String },
    /// Derive the operator associated with the ansatz.
    DeriveOperator { problem: String },
    /// Verify explicit solutions and the essentiality of a family's parameters.
    VerifySolution { problem: String },
    /// Run the full pipeline on a bundled example: sl2, fast-diffusion-w or heat.
    Demo { name: String },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

fn parse_span(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err("END must exceed START".into());
    }
    Ok((a, b))
}

/// Reads a problem from a path, or from the bundled corpus when written `@name`.
fn load(arg: &str) -> Result<ProblemFile, CliError> {
    match arg.strip_prefix('@') {
        Some(name) => match corpus::get(name) {
            Some(text) => Ok(ProblemFile::parse(text)?),
            None => Err(ProblemError::Missing(format!("bundled problem `{name}`")).into()),
        },
        None => Ok(ProblemFile::read(arg.as_ref())?),
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let opts = Options {
        seed: cli.seed,
        points: cli.points,
        threshold: cli.threshold,
        step: cli.step,
        t_span: cli.tspan,
    };
    match &cli.command {
        Command::Check { problem } => gcs_cli::cmd_check(&load(problem)?, &opts),
        Command::Reduce { problem } => gcs_cli::cmd_reduce(&load(problem)?, &opts),
        Command::Convert { problem } => gcs_cli::cmd_convert(&load(problem)?, &opts),
        Command::DeriveOperator { problem } => gcs_cli::cmd_derive_operator(&load(problem)?, &opts),
        Command::VerifySolution { problem } => gcs_cli::cmd_verify_solution(&load(problem)?, &opts),
        Command::Demo { name } => gcs_cli::cmd_demo(name, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match run(&cli) {
        Ok(report) => {
            let text = if cli.json {
                report.to_json() + "\n"
            } else {
                report.to_string()
            };
            (text, report.status.code())
        }
        Err(e) => {
            if cli.json {
                let body = serde_json::json!({ "status": "failure", "error": e.to_string() });
                (format!("{body:#}\n"), 2)
            } else {
                eprintln!("error: {e}");
                (String::new(), 2)
            }
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}
