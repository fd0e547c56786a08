//! `shapekin` command line: runs evolution, compatibility, reconstruction
//! and sweep scenarios from a JSON config and writes CSV/JSON artifacts.

mod compat;
mod config;
mod error;
mod evolve;
mod output;
mod reconstruct;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::output::{Header, OutDir, TOOL, VERSION};

#[derive(Parser)]
#[command(
    name = "shapekin",
    version,
    about = "Frame-free finite deformation kinematics scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate shape tensors along material points; writes trajectory.csv.
    Evolve(Common),
    /// Ricci and Saint-Venant residuals of a shape field; writes ricci_field.csv.
    Compat(Common),
    /// Cesàro–Volterra potential of a strain field; writes displacement.csv.
    Reconstruct(Common),
    /// Grid refinement or time step study; writes convergence.csv.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for randomized inputs; overrides the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// No progress output on stdout.
    #[arg(long)]
    quiet: bool,
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SHAPEKIN_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "SHAPEKIN_THREADS = `{v}` is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

type Runner = fn(&config::Loaded, Header, &mut OutDir) -> Result<(), CliError>;

fn execute(cli: Cli) -> Result<(), CliError> {
    threads()?;
    let (name, args, run): (&'static str, Common, Runner) = match cli.command {
        Command::Evolve(a) => ("evolve", a, evolve::run),
        Command::Compat(a) => ("compat", a, compat::run),
        Command::Reconstruct(a) => ("reconstruct", a, reconstruct::run),
        Command::Sweep(a) => ("sweep", a, sweep::run),
    };
    let loaded = config::load(&args.config)?;
    let header = Header {
        tool: TOOL,
        version: VERSION,
        command: name,
        scenario: loaded.config.name.clone(),
        config_sha256: loaded.sha256.clone(),
        seed: args.seed.unwrap_or(loaded.config.seed),
    };
    let mut out = OutDir::create(&args.out)?;
    run(&loaded, header, &mut out)?;
    if !args.quiet {
        for p in &out.written {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shapekin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
