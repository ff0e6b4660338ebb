//! `nclab`: run reproducible operator-algebra experiments from JSON
//! specs and write deterministic reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nclab::experiments::{demo_spec, parse_spec, run, DEMO_NAMES};

#[derive(Parser)]
#[command(name = "nclab", version, about = "Numerical operator-algebra lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec file and write its JSON report.
    Run {
        /// Path to the JSON experiment spec.
        spec: PathBuf,
        /// Output directory for the report (and CSV for sweeps).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the seed declared in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one of the built-in instances.
    Demo {
        /// Demo name; use --list to enumerate.
        name: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// List available demos and exit.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { spec, out, seed } => {
            let bytes = match std::fs::read(&spec) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", spec.display());
                    return ExitCode::from(2);
                }
            };
            execute(&bytes, seed, &out)
        }
        Command::Demo {
            name,
            out,
            seed,
            list,
        } => {
            if list || name.is_none() {
                for n in DEMO_NAMES {
                    println!("{n}");
                }
                return ExitCode::SUCCESS;
            }
            let name = name.unwrap();
            let Some(raw) = demo_spec(&name) else {
                eprintln!(
                    "error: unknown demo {name:?}; available: {}",
                    DEMO_NAMES.join(", ")
                );
                return ExitCode::from(2);
            };
            execute(raw.as_bytes(), seed, &out)
        }
    }
}

fn execute(bytes: &[u8], seed: Option<u64>, out: &std::path::Path) -> ExitCode {
    let spec = match parse_spec(bytes) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid spec: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match run(&spec, seed, bytes) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: experiment failed: {e}");
            return ExitCode::from(2);
        }
    };
    let path = match outcome.report.write_to(out) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(csv) = &outcome.csv {
        if let Err(e) = csv.write_to(out, &outcome.report.experiment) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut all_pass = true;
    for a in &outcome.report.assertions {
        println!(
            "{} {}: lhs={:.6e} rhs={:.6e} tol={:.1e}",
            if a.pass { "PASS" } else { "FAIL" },
            a.name,
            a.lhs,
            a.rhs,
            a.tol
        );
        all_pass &= a.pass;
    }
    println!("report: {}", path.display());
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
