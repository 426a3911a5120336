use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use obstacle_lab::run::{execute, Command};
use obstacle_lab::{ExperimentConfig, LabError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Solve,
    Sweep,
    PhiTrace,
    Spectrum,
    FitGrowth,
    Verify,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Solve => Command::Solve,
            Sub::Sweep => Command::Sweep,
            Sub::PhiTrace => Command::PhiTrace,
            Sub::Spectrum => Command::Spectrum,
            Sub::FitGrowth => Command::FitGrowth,
            Sub::Verify => Command::Verify,
        }
    }
}

/// Penalized boundary obstacle laboratory.
#[derive(Debug, Parser)]
#[command(name = "obstacle-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for independent solves.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory; overrides `output_dir` of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<Option<String>, LabError> {
    let cfg = ExperimentConfig::load(&cli.config)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let outcome = execute(cli.command.into(), &cfg, &out, cli.workers)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    Ok(outcome.violation)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(violation)) => {
            eprintln!("invariant violated: {violation}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
