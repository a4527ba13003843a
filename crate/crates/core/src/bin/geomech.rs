use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geomech::cli::{load_spec, run, RunOptions};
use geomech::symexpr::SampleConfig;

#[derive(Parser)]
#[command(name = "geomech", version, about = "Verify geometric-mechanics specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a specification file and emit a JSONL report.
    Check {
        spec: PathBuf,
        /// Comma-separated check ids to run, in declaration order.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Root sampling seed; GEOMECH_SEED takes precedence.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Add per-check wall time (makes reports run-dependent).
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Check { spec, only, seed, samples, tol, report, timings } = cli.command;
    let defaults = SampleConfig::default();
    let seed = match std::env::var("GEOMECH_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("geomech: GEOMECH_SEED is not an unsigned integer: {s:?}");
                return ExitCode::from(2);
            }
        },
        Err(_) => seed.unwrap_or(defaults.seed),
    };
    let system = match load_spec(&spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("geomech: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        seed,
        samples: samples.unwrap_or(defaults.n_samples),
        tol: tol.unwrap_or(defaults.tol),
        timings,
        spec_label: spec.display().to_string(),
    };
    let result = match run(&system, only.as_deref(), &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("geomech: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &report {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            result.write_jsonl(&mut w)?;
            w.flush()
        }),
        None => result.write_jsonl(io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("geomech: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if result.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
