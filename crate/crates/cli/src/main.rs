use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use boxconvex_cli::{dispatch, render, CliError, Config, COMMANDS};
use clap::Parser;

/// Verify box-n-convexity, convex orders and the related inequalities from
/// JSON input documents.
#[derive(Debug, Parser)]
#[command(name = "boxconvex", version, about)]
struct Args {
    /// One of: divdiff, certify, interpolate, regularize, order, box-order,
    /// hh, jensen, rasa, synth, extract-measure, decompose, strong.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,
    /// Input JSON document; `-` reads standard input.
    #[arg(long, default_value = "-")]
    input: String,
    /// Seed of the random sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Number of sampled point systems.
    #[arg(long)]
    trials: Option<usize>,
    /// Quadrature panels per uniform segment.
    #[arg(long)]
    resolution: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn fail(message: serde_json::Value) -> ExitCode {
    eprint!("{}", render(&message));
    ExitCode::from(CliError::EXIT_CODE as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let input = match read_input(&args.input) {
        Ok(s) => s,
        Err(e) => return fail(serde_json::json!({ "error": "io", "message": format!("{}: {e}", args.input) })),
    };
    let cfg = Config { seed: args.seed, tol: args.tol, trials: args.trials, resolution: args.resolution };
    let outcome = match dispatch(&args.command, &input, &cfg) {
        Ok(o) => o,
        Err(e) => return fail(e.to_json()),
    };
    let text = render(&outcome.report);
    let written = match &args.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        return fail(serde_json::json!({ "error": "io", "message": e.to_string() }));
    }
    ExitCode::from(outcome.code as u8)
}
