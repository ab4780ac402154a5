//! `alphabeta --scenario FILE [--out DIR] [--threads N] [--seed N]`
//!
//! Exit codes: 0 when every checked property holds, 1 when one fails (or a
//! computation cannot finish), 2 on malformed input.

mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use run::{Artifact, Failure};
use scenario::{Format, Scenario};

#[derive(Parser)]
#[command(name = "alphabeta", version, about = "Run an (alpha, beta)-norm scenario file")]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the output artifact, overriding the scenario's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for per-sample work (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

const INPUT_ERROR: u8 = 2;
const PROPERTY_FAILURE: u8 = 1;

fn output_path(scenario: &Scenario, out: Option<&Path>) -> (PathBuf, Format) {
    let (path, format) = match &scenario.header.output {
        Some(o) => (o.path.clone(), o.format),
        None => (PathBuf::from(format!("{}.json", scenario.header.command.name())), Format::Json),
    };
    match out {
        Some(dir) => (dir.join(path.file_name().unwrap_or(path.as_os_str())), format),
        None => (path, format),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
    }
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(INPUT_ERROR);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let scenario = match Scenario::load(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("input error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let seed = args.seed.unwrap_or(scenario.header.seed);
    let command = scenario.header.command.name();
    let (path, format) = output_path(&scenario, args.out.as_deref());

    let artifact = match run::run(&scenario, seed) {
        Ok(a) => a,
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            return ExitCode::from(INPUT_ERROR);
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("{command}: {msg}");
            let report = json!({"command": command, "seed": seed, "pass": false, "error": msg});
            if format == Format::Json {
                if let Err(e) = alphabeta::export::to_json(&report).map_err(|e| e.to_string()).and_then(|t| write(&path, &t)) {
                    eprintln!("error: {e}");
                }
            }
            return ExitCode::from(PROPERTY_FAILURE);
        }
    };
    let Artifact { pass, report, csv } = artifact;
    let contents = match format {
        Format::Json => {
            let doc = json!({"command": command, "seed": seed, "pass": pass, "report": report});
            alphabeta::export::to_json(&doc).expect("JSON values serialize")
        }
        Format::Csv => match csv {
            Some(t) => t,
            None => {
                eprintln!("input error: output.format: `{command}` has no CSV form, use json");
                return ExitCode::from(INPUT_ERROR);
            }
        },
    };
    if let Err(e) = write(&path, &contents) {
        eprintln!("error: {e}");
        return ExitCode::from(INPUT_ERROR);
    }
    if !pass {
        if let Some(failures) = report.get("failures").and_then(|f| f.as_array()) {
            for f in failures {
                eprintln!("{}", f.as_str().unwrap_or_default());
            }
        }
    }
    println!("{} {command} -> {}", if pass { "PASS" } else { "FAIL" }, path.display());
    ExitCode::from(if pass { 0 } else { PROPERTY_FAILURE })
}
