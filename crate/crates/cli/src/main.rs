//! `cascadelab` command-line interface.

mod commands;
mod config;
mod experiment;
mod failure;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::{CliResult, Failure};

#[derive(Parser, Debug)]
#[command(name = "cascadelab", version, about = "Classify information cascades by their generating process")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic network edge list.
    GenNet(commands::GenNetArgs),
    /// Simulate cascades on a network.
    Simulate(commands::SimulateArgs),
    /// Sample a labeled group from cascade files and split it.
    BuildGroup(commands::BuildGroupArgs),
    /// Write the graph-level feature vectors of a cascade file as CSV.
    Featurize(commands::FeaturizeArgs),
    /// Train one algorithm on a group's training partition.
    Train(commands::TrainArgs),
    /// Evaluate a saved model on a group partition.
    Eval(commands::EvalArgs),
    /// End-to-end experiments on synthetic data.
    #[command(subcommand)]
    Experiment(experiment::ExperimentCommand),
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(failure::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match &cli.command {
        Command::GenNet(a) => commands::gen_net(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::BuildGroup(a) => commands::build_group_cmd(a),
        Command::Featurize(a) => commands::featurize(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Experiment(c) => experiment::run(c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Runtime(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
