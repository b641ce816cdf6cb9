//! `firelab`: reproducible forest-fire and percolation experiments.

mod commands;
mod config;
mod error;
mod manifest;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use firelab::Execution;

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{sha256_hex, RunManifest, MANIFEST_FILE};

#[derive(Parser)]
#[command(name = "firelab", version, about = "Forest-fire and percolation experiments on the triangular lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the forest-fire process on one window and log every fire.
    Simulate(Common),
    /// Estimate one-arm probabilities over a list of radii.
    Onearm(Common),
    /// Fit correlation lengths over a list of times and their exponent.
    Xiscan(Common),
    /// Estimate the coupled boundary-site events and their summability.
    Events(Common),
    /// Distribution of the certified height of destruction.
    Heights(Common),
    /// Run the invariant and oracle suites.
    Verify(Common),
    /// Print the default configuration.
    Defaults,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat TOML config, or a manifest.json to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "FIRELAB_THREADS")]
    threads: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    t_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    heights: Option<Vec<i32>>,
    /// xiscan: fit exact power-law input instead of sampling.
    #[arg(long)]
    synthetic: bool,
    /// Any other config key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for s in &self.set {
            c.set(s)?;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.threads {
            c.threads = Some(v);
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.samples {
            c.samples = v;
            c.event_samples = v;
            c.height_samples = v;
        }
        if let Some(v) = self.t {
            c.t = v;
        }
        if let Some(v) = self.t_end {
            c.t_end = v;
        }
        if let Some(v) = &self.n_list {
            c.n_list = v.clone();
            c.xi_n_list = v.clone();
            c.event_n_list = v.clone();
        }
        if let Some(v) = &self.t_list {
            c.t_list = v.clone();
        }
        if let Some(v) = &self.heights {
            c.heights = v.clone();
        }
        if self.synthetic {
            c.synthetic = true;
        }
        Ok(c)
    }
}

type Runner = fn(&RunConfig, Execution) -> Result<Output, CliError>;

fn write_outputs(dir: &Path, name: &str, config: &RunConfig, started: String, out: &Output) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: name.to_string(),
        config: config.clone(),
        started_at: started,
        finished_at: String::new(),
        exit_code: out.failure.as_ref().map_or(0, CliError::exit_code),
        outputs: Default::default(),
    };
    for (file, bytes) in &out.files {
        std::fs::write(dir.join(file), bytes).map_err(io)?;
        manifest.outputs.insert(file.clone(), sha256_hex(bytes));
    }
    manifest.finished_at = now();
    std::fs::write(dir.join(MANIFEST_FILE), manifest.emit()).map_err(io)?;
    Ok(())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn execute(name: &str, common: &Common, runner: Runner) -> Result<(), CliError> {
    let config = common.resolve()?;
    if let Some(n) = config.threads {
        firelab::Execution::set_threads(n)?;
    }
    let started = now();
    let out = runner(&config, Execution::default())?;
    write_outputs(&config.out, name, &config, started, &out)?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, runner): (&str, &Common, Runner) = match &cli.command {
        Command::Simulate(c) => ("simulate", c, commands::simulate),
        Command::Onearm(c) => ("onearm", c, commands::onearm),
        Command::Xiscan(c) => ("xiscan", c, commands::xiscan),
        Command::Events(c) => ("events", c, commands::events),
        Command::Heights(c) => ("heights", c, commands::heights),
        Command::Verify(c) => ("verify", c, verify::verify),
        Command::Defaults => {
            print!("{}", RunConfig::default().to_toml());
            return ExitCode::SUCCESS;
        }
    };
    match execute(name, common, runner) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
