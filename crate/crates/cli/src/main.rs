//! `limtomo`: experiment runner for limited-angle weighted Radon transforms.
//!
//! Exit codes: 0 success, 1 a configured check failed, 2 invalid
//! configuration, 3 I/O or computation error.

mod commands;
mod config;
mod error;
mod expr;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Experiment;
use crate::error::{io_err, CliError};

#[derive(Parser)]
#[command(name = "limtomo", version, about = "Limited-angle tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize and project the phantom: phantom.pfg, sinogram.pfg.
    Simulate(Common),
    /// Cutoff, filter and backproject: recon.pfg, recon.json.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/sinogram.pfg.
        #[arg(long)]
        sinogram: Option<PathBuf>,
    },
    /// Visible set and artifact lines: visible.csv, artifacts.csv.
    Predict(Common),
    /// Detect singularities and score them: detections.csv, verify.json.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/recon.pfg.
        #[arg(long)]
        recon: Option<PathBuf>,
        /// Defaults to <out>/sinogram.pfg.
        #[arg(long)]
        sinogram: Option<PathBuf>,
        /// Directory holding visible.csv and artifacts.csv; defaults to <out>.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Gabor-probe symbol measurements: symbol.csv.
    Symbol(Common),
    /// Ellipticity report: elliptic.txt.
    Elliptic(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c) | Command::Predict(c) | Command::Symbol(c) | Command::Elliptic(c) => c,
            Command::Reconstruct { common, .. } | Command::Verify { common, .. } => common,
        }
    }
}

fn or_out(p: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| out.join(name))
}

fn dispatch(cmd: &Command, exp: &Experiment) -> Result<usize, CliError> {
    let out = &cmd.common().out;
    match cmd {
        Command::Simulate(_) => commands::simulate(exp, out),
        Command::Reconstruct { sinogram, .. } => commands::reconstruct(exp, &or_out(sinogram, out, "sinogram.pfg"), out),
        Command::Predict(_) => commands::predict(exp, out),
        Command::Verify { recon, sinogram, predictions, .. } => {
            let inputs = commands::VerifyInputs {
                recon: or_out(recon, out, "recon.pfg"),
                sinogram: or_out(sinogram, out, "sinogram.pfg"),
                predictions: predictions.clone().unwrap_or_else(|| out.clone()),
            };
            commands::verify(exp, &inputs, out)
        }
        Command::Symbol(_) => commands::symbol(exp, out),
        Command::Elliptic(_) => commands::elliptic(exp, out),
    }
}

fn run(cli: &Cli) -> Result<usize, CliError> {
    let common = cli.command.common();
    let exp = Experiment::load(&common.config)?;
    std::fs::create_dir_all(&common.out).map_err(io_err(&common.out))?;
    let threads = exp.config.threads;
    if threads == 0 {
        return dispatch(&cli.command, &exp);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config { field: "threads".into(), msg: e.to_string() })?;
    pool.install(|| dispatch(&cli.command, &exp))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("error: {}", CliError::Failed(n));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
