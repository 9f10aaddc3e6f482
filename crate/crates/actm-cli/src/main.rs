//! Batch front end for the forceps design pipeline: FEM validation, shape
//! optimization, torque synthesis, and parameter sweeps, driven by a TOML
//! config with built-in defaults.

mod config;
mod pipeline;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use config::ProjectConfig;
use pipeline::CliError;

#[derive(Parser)]
#[command(name = "actm", version, about = "Design automation for adjustable constant-torque forceps")]
struct Cli {
    /// Configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the GA seed from the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the beam solver's benchmark suite against analytic references.
    ValidateFem,
    /// Searches beam shapes for the most linear negative-stiffness torque.
    Optimize {
        /// Replaces the FEM fitness with a fast geometric surrogate.
        #[arg(long)]
        surrogate: bool,
    },
    /// Builds net torque curves at the given targets from the optimized design.
    Synthesize {
        /// Torque targets, mN*m, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 20.0, 30.0])]
        targets: Vec<f64>,
    },
    /// Re-runs synthesis across one parameter and tabulates the metrics.
    Sweep {
        /// One of: w_mm, r_mm, k_mnm_per_deg, width_mm.
        parameter: String,
        /// Sample values, comma separated.
        #[arg(value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Torque target, mN*m, applied to every sample.
        #[arg(long, default_value_t = 10.0)]
        target: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut project = match &cli.config {
        Some(path) => ProjectConfig::load(path)?,
        None => ProjectConfig::default(),
    };
    if let Some(seed) = cli.seed {
        project.ga.rng_seed = seed;
    }
    if let Some(out) = &cli.out {
        project.output.dir = out.clone();
    }

    match &cli.command {
        Command::ValidateFem => pipeline::cmd_validate_fem(&project.resolve()?),
        Command::Optimize { surrogate } => pipeline::cmd_optimize(&project.resolve()?, *surrogate),
        Command::Synthesize { targets } => pipeline::cmd_synthesize(&project.resolve()?, targets),
        Command::Sweep {
            parameter,
            values,
            target,
        } => pipeline::cmd_sweep(&project, parameter, values, *target),
    }
}
