//! `sideband`: closed-form spectra, Monte Carlo runs, thermometry and power
//! sweeps from a TOML configuration.
//!
//! Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
//! 4 regime violation under `--strict`, 1 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Context, Options};
use config::Config;
use error::CliError;
use output::Emission;

#[derive(Debug, Parser)]
#[command(name = "sideband", version, about = "Sideband asymmetry spectra from stochastic electrodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form heterodyne or homodyne photocurrent PSD.
    Analytic,
    /// Monte Carlo detector record and its Welch PSD.
    Simulate,
    /// Simulated, closed-form and quantum spectra on one grid.
    Compare,
    /// Fit both sidebands of a simulated spectrum and infer n̄.
    Thermometry,
    /// Displacement noise budget against probe power.
    Sql,
    /// Classical against quantum spectra on the configured grids.
    Crosscheck,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration; the built-in default is used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override sim.seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Override sim.segments.
    #[arg(long, global = true, value_name = "N")]
    segments: Option<usize>,
    /// Treat regime warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    /// Emit PSDs per Hz against frequency in Hz.
    #[arg(long, global = true)]
    per_hz: bool,
    /// Emit one-sided PSDs (ω ≥ 0, positive bins doubled).
    #[arg(long, global = true)]
    one_sided: bool,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let cfg = Config::load(g.config.as_deref())?;
    let opts = Options {
        out: g.out,
        seed: g.seed,
        segments: g.segments,
        strict: g.strict,
        emission: Emission {
            per_hz: g.per_hz,
            one_sided: g.one_sided,
        },
        svg: g.svg,
    };
    let ctx = Context::new(cfg, opts)?;
    match cli.command {
        Command::Analytic => commands::analytic(&ctx),
        Command::Simulate => commands::simulate_cmd(&ctx),
        Command::Compare => commands::compare(&ctx),
        Command::Thermometry => commands::thermometry_cmd(&ctx),
        Command::Sql => commands::sql(&ctx),
        Command::Crosscheck => commands::crosscheck(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
