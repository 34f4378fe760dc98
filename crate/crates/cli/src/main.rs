mod commands;
mod figures;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fragsim::Executor;

use spec::{Command, ExperimentSpec, UsageError};

#[derive(Parser, Debug)]
#[command(
    name = "fragsim",
    version,
    about = "Fragmented constrained dynamics with boundary baths"
)]
struct Cli {
    /// JSON experiment spec; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Enumerate Krylov sectors as JSONL.
    Sectors(ExperimentSpec),
    /// Write the sector graph as an edge list.
    Graph(ExperimentSpec),
    /// Time series of observables.
    Simulate(ExperimentSpec),
    /// Conductance of the weakest cut found.
    Conductance(ExperimentSpec),
    /// Spectral gap of the sector graph.
    Spectrum(ExperimentSpec),
    /// Regenerate every CSV the plotting scripts read.
    FiguresData(ExperimentSpec),
}

impl Sub {
    fn split(self) -> (Command, ExperimentSpec) {
        match self {
            Sub::Sectors(s) => (Command::Sectors, s),
            Sub::Graph(s) => (Command::Graph, s),
            Sub::Simulate(s) => (Command::Simulate, s),
            Sub::Conductance(s) => (Command::Conductance, s),
            Sub::Spectrum(s) => (Command::Spectrum, s),
            Sub::FiguresData(s) => (Command::FiguresData, s),
        }
    }
}

fn executor() -> Result<Executor> {
    let Ok(raw) = std::env::var("FRAGSIM_THREADS") else {
        return Ok(Executor::Parallel);
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("FRAGSIM_THREADS=`{raw}` is not a positive integer")))?;
    if threads == 0 {
        return Err(UsageError("FRAGSIM_THREADS must be at least 1".into()).into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting worker pool")?;
    Ok(if threads == 1 {
        Executor::Sequential
    } else {
        Executor::Parallel
    })
}

fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    let (command, flags) = match cli.command {
        Some(sub) => {
            let (c, s) = sub.split();
            (Some(c), s)
        }
        None => (None, ExperimentSpec::default()),
    };
    let mut spec = base.overlay(&flags);
    if let Some(c) = command {
        spec.command = Some(c);
    }
    let command = spec
        .command
        .ok_or_else(|| UsageError("no command given on the command line or in the config".into()))?;
    let exec = executor()?;
    match command {
        Command::Sectors => commands::sectors(&spec),
        Command::Graph => commands::graph(&spec, exec),
        Command::Simulate => commands::simulate(&spec, exec),
        Command::Conductance => commands::conductance(&spec, exec),
        Command::Spectrum => commands::spectrum(&spec, exec),
        Command::FiguresData => figures::figures_data(&spec, exec),
    }
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<fragsim::Error>() {
        e.kind()
    } else if err.downcast_ref::<UsageError>().is_some() {
        "usage"
    } else if err.downcast_ref::<serde_json::Error>().is_some() {
        "config"
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "cli"
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let report =
                serde_json::json!({ "error": "usage", "message": e.kind().to_string(), "detail": e.to_string() });
            eprintln!("{report}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = serde_json::json!({ "error": error_kind(&err), "message": format!("{err:#}") });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
