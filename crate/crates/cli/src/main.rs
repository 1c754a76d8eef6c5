use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voter_cli::config::{ExperimentConfig, ExperimentKind};
use voter_cli::emit::{write_output, Format};
use voter_cli::error::{CliError, CliResult};
use voter_cli::runner::{reproduce_figure, run_experiment, Overrides};

#[derive(Parser)]
#[command(name = "voter", version, about = "Influence scheduling experiments on the generalized voter model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// JSON experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Monte Carlo replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Largest state space (M + 1) for exact propagation.
    #[arg(long)]
    cap_states: Option<u32>,
    /// Largest number of schedules to enumerate.
    #[arg(long)]
    cap_schedules: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run or ensemble; writes (t, delta_N).
    Simulate(Flags),
    /// Mean-field trajectory; writes (t, delta_N).
    Ode(Flags),
    /// S_L vs S_F, optionally swept over lambda or mu.
    Compare(Flags),
    /// Crossover lambda for Model I.
    Crossover(Flags),
    /// Exhaustive schedule search with the exact objective.
    Bruteforce(Flags),
    /// Azuma-Hoeffding bounds against an ensemble.
    Concentration(Flags),
    /// Regenerate the data behind a published figure.
    ReproduceFig {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        figure: u8,
        #[command(flatten)]
        flags: Flags,
    },
}

fn run_config(kind: ExperimentKind, flags: &Flags) -> CliResult<()> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("`{}` needs --config", kind.name())))?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    Overrides {
        seed: flags.seed,
        reps: flags.reps,
        cap_states: flags.cap_states,
        cap_schedules: flags.cap_schedules,
    }
    .apply(&mut cfg)?;
    let artifact = run_experiment(kind, &cfg)?;
    let out = flags.out.clone().or(cfg.output.clone());
    write_output(&artifact.render(flags.format), out.as_deref())
}

fn run(cli: Cli) -> CliResult<()> {
    let (kind, flags) = match cli.command {
        Command::Simulate(f) => (ExperimentKind::Simulate, f),
        Command::Ode(f) => (ExperimentKind::Ode, f),
        Command::Compare(f) => (ExperimentKind::Compare, f),
        Command::Crossover(f) => (ExperimentKind::Crossover, f),
        Command::Bruteforce(f) => (ExperimentKind::Bruteforce, f),
        Command::Concentration(f) => (ExperimentKind::Concentration, f),
        Command::ReproduceFig { figure, flags } => {
            let artifact = reproduce_figure(figure, flags.reps.unwrap_or(100), flags.seed.unwrap_or(0))?;
            return write_output(&artifact.render(flags.format), flags.out.as_deref());
        }
    };
    run_config(kind, &flags)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
