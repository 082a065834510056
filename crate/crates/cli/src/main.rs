use std::process::ExitCode;

use cfree_core::algebra::SubalgebraKind;
use cfree_core::error::CfreeError;
use cfree_core::experiment::{run_experiment, schemas, ExperimentConfig, Suite};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfree", version, about = "Seeded verification suites for conditionally free transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write its JSON report.
    Run {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value = "full")]
        dkind: String,
        #[arg(long, default_value_t = 4)]
        trunc: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
        tol: f64,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the JSON schemas of configs, reports and data forms.
    Schema,
}

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&schemas()).expect("schema serializes"));
            ExitCode::SUCCESS
        }
        Command::Run { suite, d, dkind, trunc, seed, trials, tol, out } => {
            let config = suite.parse::<Suite>().and_then(|suite| {
                let d_kind = dkind.parse::<SubalgebraKind>()?;
                Ok(ExperimentConfig { suite, d, d_kind, truncation: trunc, seed, trials, tol, out })
            });
            match config.and_then(|c| run(&c)) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(EXIT_FAIL),
                Err(e @ CfreeError::InvalidConfig(_)) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_INVALID)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
    }
}

fn run(config: &ExperimentConfig) -> cfree_core::error::Result<bool> {
    let report = run_experiment(config)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &config.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    for c in &report.checks {
        eprintln!(
            "{} {:<30} max deviation {:.3e} (tol {:.1e}) {:.1} ms",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_deviation,
            c.tolerance,
            c.runtime_ms
        );
    }
    Ok(report.passed)
}
