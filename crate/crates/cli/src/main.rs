use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use gridasm::asm::ChoosePolicy;
use gridasm::scenario::{parse_scenario, validate_scenario, Matchmaking, Mode, Scenario, Variant};
use gridasm::sim::{emit_trace, run, Outcome, SimError, Trace};

const EXIT_ALL_DONE: u8 = 0;
const EXIT_NOT_ALL_DONE: u8 = 2;
const EXIT_ENGINE_FAULT: u8 = 3;
const EXIT_SCENARIO_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "gridasm", version, about = "Deterministic grid brokering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report (and optionally its trace).
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Seed for seeded choose; also switches choose to seeded mode.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Write the TSV trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_parser = ["local", "broker", "meta"])]
    mode: Option<String>,
    #[arg(long, value_parser = ["base", "refined"])]
    matchmaking: Option<String>,
}

fn load(args: &RunArgs) -> Result<Scenario> {
    let text = fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading {}", args.scenario.display()))?;
    let mut scenario = parse_scenario(&text)
        .with_context(|| format!("parsing {}", args.scenario.display()))?;
    let cfg = &mut scenario.config;
    if let Some(seed) = args.seed {
        cfg.choose = ChoosePolicy::seeded(seed);
    }
    if let Some(n) = args.max_steps {
        cfg.max_steps = n;
    }
    if let Some(mode) = &args.mode {
        cfg.mode = mode.parse::<Mode>().map_err(anyhow::Error::msg)?;
    }
    if let Some(mm) = &args.matchmaking {
        cfg.matchmaking = Matchmaking::both(mm.parse::<Variant>().map_err(anyhow::Error::msg)?);
    }
    if let Err(errors) = validate_scenario(&scenario) {
        let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        anyhow::bail!("invalid scenario:\n  {}", lines.join("\n  "));
    }
    Ok(scenario)
}

fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    emit_trace(trace, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_command(args: &RunArgs) -> Result<u8> {
    let scenario = match load(args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(EXIT_SCENARIO_ERROR);
        }
    };
    let (report, trace) = match run(&scenario) {
        Ok(r) => r,
        Err(SimError::Init(e)) => {
            eprintln!("error: {e}");
            return Ok(EXIT_SCENARIO_ERROR);
        }
        Err(SimError::Engine { error, trace }) => {
            eprintln!("engine fault: {error}");
            if let Some(path) = &args.trace {
                write_trace(path, &trace)?;
            }
            return Ok(EXIT_ENGINE_FAULT);
        }
    };
    if let Some(path) = &args.trace {
        write_trace(path, &trace)?;
    }
    match &args.report {
        Some(path) => fs::write(path, report.to_string())
            .with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(report.to_string().as_bytes())?,
    }
    Ok(match report.outcome {
        Outcome::AllDone => EXIT_ALL_DONE,
        Outcome::SomeFailed | Outcome::InFlight => EXIT_NOT_ALL_DONE,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run_command(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
