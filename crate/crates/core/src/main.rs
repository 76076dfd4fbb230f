use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crdyn::scenario::{parse_scenario, run};

/// Run a scenario file and report certificates, refutations and traces.
#[derive(Debug, Parser)]
#[command(name = "crdyn", version)]
struct Args {
    /// Scenario file to run.
    #[arg(long)]
    scenario: PathBuf,
    /// Seed for randomized suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the machine-readable report (JSON) here.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Do not print the text report.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.scenario.display());
            return ExitCode::from(2);
        }
    };
    let report = match parse_scenario(&text).and_then(|sc| run(&sc, args.seed)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(path) = &args.emit {
        let mut json = serde_json::to_string_pretty(&report.json).expect("serializable report");
        json.push('\n');
        if let Err(e) = std::fs::write(path, json) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if !args.quiet {
        print!("{}", report.text);
    }
    ExitCode::from(report.exit_code() as u8)
}
