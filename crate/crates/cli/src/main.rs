//! `evego`: command-line front end for the evego toolkit.

mod commands;
mod config;
mod error;
mod fileio;
mod log;

use clap::{Args, Parser, Subcommand};
use config::Config;
use error::{exit_code, kind, usage};
use evego_core::Execution;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "evego", version, about = "Egocentric event-camera motion capture toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Key-value config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (overrides EVEGO_THREADS and the config file).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Run batch work on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Suppress the JSON stage log on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect, convert and size event streams.
    #[command(subcommand)]
    Events(commands::events::EventsCmd),
    /// Encode, visualise and augment LNES frames.
    #[command(subcommand)]
    Lnes(commands::lnes::LnesCmd),
    /// Fisheye projection and back-projection.
    #[command(subcommand)]
    Camera(commands::geometry::CameraCmd),
    /// Hand-eye calibration and rigid transforms.
    #[command(subcommand)]
    Calib(commands::geometry::CalibCmd),
    /// Per-joint visibility of a pose against a labelled body mesh.
    Visibility(commands::geometry::VisibilityArgs),
    /// MPJPE and PA-MPJPE per action.
    Eval(commands::eval::EvalArgs),
    /// Synthesize events from an intensity frame sequence.
    Simulate(commands::simulate::SimulateArgs),
    /// Events to windows to LNES to REPM network inputs, with exports.
    Pipeline(commands::pipeline::PipelineArgs),
}

/// Resolved settings shared by all subcommands.
pub struct Context {
    pub config: Config,
    pub exec: Execution,
    pub log: log::Log,
}

fn thread_count(global: &Global, config: &Config) -> anyhow::Result<Option<usize>> {
    if let Some(n) = global.threads {
        return Ok(Some(n));
    }
    if let Ok(raw) = std::env::var("EVEGO_THREADS") {
        let n = raw
            .trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("EVEGO_THREADS must be a positive integer, got {raw:?}")))?;
        return Ok(Some(n));
    }
    Ok(config.threads)
}

fn setup(global: &Global) -> anyhow::Result<Context> {
    let config = match &global.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(n) = thread_count(global, &config)? {
        if n == 0 {
            return Err(usage("thread count must be at least 1"));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("configuring thread pool: {e}"))?;
    }
    let exec = if global.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    Ok(Context {
        config,
        exec,
        log: log::Log::new(global.quiet),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = setup(&cli.global)?;
    match cli.command {
        Command::Events(c) => commands::events::run(c, &ctx),
        Command::Lnes(c) => commands::lnes::run(c, &ctx),
        Command::Camera(c) => commands::geometry::run_camera(c, &ctx),
        Command::Calib(c) => commands::geometry::run_calib(c, &ctx),
        Command::Visibility(a) => commands::geometry::run_visibility(a, &ctx),
        Command::Eval(a) => commands::eval::run(a, &ctx),
        Command::Simulate(a) => commands::simulate::run(a, &ctx),
        Command::Pipeline(a) => commands::pipeline::run(a, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            let report = serde_json::json!({
                "error": kind(code),
                "exit_code": code,
                "message": format!("{err:#}"),
            });
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_are_errors() {
        assert!(Cli::try_parse_from(["evego", "eval", "--bogus"]).is_err());
    }
}
