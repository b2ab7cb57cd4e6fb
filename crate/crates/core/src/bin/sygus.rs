use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use sygus::dispatch::{solve, SolverConfig, Strategy};
use sygus::frontend::{load_problem, print_solution};
use sygus::problem::SynthOutcome;

/// Solve a SyGuS-IF problem and print the synthesized definitions.
#[derive(Parser, Debug)]
#[command(name = "sygus", version)]
struct Args {
    /// Problem file; standard input when omitted.
    file: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    strategy: Strategy,
    /// Wall-clock budget in milliseconds; 0 disables it.
    #[arg(long, default_value_t = 60_000)]
    timeout_ms: u64,
    /// Largest term size enumerated.
    #[arg(long)]
    max_size: Option<usize>,
    /// Int range of the bounded verifier.
    #[arg(long)]
    verify_bound: Option<i64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print counters as key=value lines on stderr.
    #[arg(long)]
    stats: bool,
    /// Suppress warnings.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.file {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map(|_| s).map_err(|e| format!("stdin: {e}"))
        }
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let problem = match load_problem(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !args.quiet {
        for w in &problem.warnings {
            eprintln!("warning: {w}");
        }
    }
    let defaults = SolverConfig::default();
    let config = SolverConfig {
        strategy: args.strategy,
        timeout: (args.timeout_ms > 0).then(|| Duration::from_millis(args.timeout_ms)),
        max_size: args.max_size.unwrap_or(defaults.max_size),
        verify_bound: args.verify_bound.unwrap_or(defaults.verify_bound),
        seed: args.seed,
    };
    let report = match solve(&problem, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", print_solution(&problem, &report.outcome));
    if args.stats {
        eprint!("{}", report.stats);
    }
    match report.outcome {
        SynthOutcome::Unknown(reason) => {
            if !args.quiet {
                eprintln!("unknown: {reason}");
            }
            ExitCode::from(1)
        }
        _ => ExitCode::SUCCESS,
    }
}
