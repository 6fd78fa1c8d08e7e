//! `jcgp`: runs geometric-phase simulations from `key = value` configs and
//! writes their CSV tables.
//!
//! Exit status: 0 on success, 2 for configuration or usage errors, 3 when a
//! computation fails or a requested phase is undefined.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jcgp::config::{parse_config, Mode};
use jcgp::harness::{run, WORKERS_ENV};
use jcgp::Error;

#[derive(Parser)]
#[command(name = "jcgp", version, about = "Geometric phases of the dissipative Jaynes-Cummings model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config file.
    Run(RunArgs),
    /// Closed evolution: kinematic phase over time.
    Unitary(RunArgs),
    /// Master-equation run: matrix elements and phases over time.
    Lindblad(RunArgs),
    /// Berry phases of the two dressed states.
    Berry(RunArgs),
    /// Bloch-sphere trajectories.
    Bloch(RunArgs),
    /// Phase over time for several damping rates.
    SweepGamma(RunArgs),
    /// Phase over time for several detunings.
    SweepDelta(RunArgs),
    /// Environment-induced phase correction on a parameter grid.
    CorrectionMap(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file with `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override or add a key, e.g. `--set gamma_over_lambda=0.2`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output path stem (overrides the `output` key).
    #[arg(short, long)]
    output: Option<String>,
    /// Worker threads for sweeps (defaults to the environment override, then all cores).
    #[arg(short, long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

impl Command {
    fn split(self) -> (Option<Mode>, RunArgs) {
        match self {
            Command::Run(a) => (None, a),
            Command::Unitary(a) => (Some(Mode::Unitary), a),
            Command::Lindblad(a) => (Some(Mode::Lindblad), a),
            Command::Berry(a) => (Some(Mode::Berry), a),
            Command::Bloch(a) => (Some(Mode::Bloch), a),
            Command::SweepGamma(a) => (Some(Mode::SweepGamma), a),
            Command::SweepDelta(a) => (Some(Mode::SweepDelta), a),
            Command::CorrectionMap(a) => (Some(Mode::CorrectionMap), a),
        }
    }
}

/// Applies overrides to the config text. Overridden lines are commented out
/// in place so that line numbers in error messages still match the file.
fn merge(text: &str, overrides: &[(String, String)]) -> String {
    let mut lines: Vec<String> = text
        .lines()
        .map(|l| {
            let key = l.split_once('=').map(|(k, _)| k.trim());
            match key {
                Some(k) if !l.trim_start().starts_with('#') && overrides.iter().any(|(o, _)| o == k) => {
                    format!("# overridden: {l}")
                }
                _ => l.to_string(),
            }
        })
        .collect();
    lines.extend(overrides.iter().map(|(k, v)| format!("{k} = {v}")));
    lines.join("\n") + "\n"
}

fn execute(command: Command) -> Result<i32, Error> {
    let (mode, args) = command.split();
    let text = match &args.config {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?
        }
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if let Some(m) = mode {
        overrides.push(("mode".to_string(), m.name().to_string()));
    }
    for o in &args.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got '{o}'")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(out) = &args.output {
        overrides.push(("output".to_string(), out.clone()));
    }
    let config = parse_config(&merge(&text, &overrides))?;
    let report = run(&config, args.workers)?;
    for path in &report.written {
        println!("{}", path.display());
    }
    for f in &report.failures {
        eprintln!("error: {f}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                3
            }
        }
    };
    ExitCode::from(code as u8)
}
