//! Command-line front end for the `pn-atom` library: verification probes and
//! physics sweeps written as CSV or JSON tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sampling;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult};
use output::{CommandOutput, OUTPUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "pn-atom", version, about = "Post-Newtonian two-body atom in a PPN background")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fit truncation orders of the expanded Lagrangians and Hamiltonians.
    OrderCheck,
    /// Internal levels, mass defects and proper-time frequencies over the sweep.
    Spectrum,
    /// Centre-of-mass trajectory of the composite atom.
    Trajectory,
    /// Term-by-term Hamiltonians at sampled phase points.
    HamiltonianReport,
    /// Poisson grid residuals and convergence orders.
    MaxwellResidual,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi_over_c2: Option<f64>,
    /// Speed of light in code units.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled phase points.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Sweep `name=start:stop:count` or `name=v1,v2,...`; replaces the
    /// configured sweeps. Repeatable.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sweep: Vec<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output directory; takes precedence over the environment and the config.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Trajectory: fail when the energy drift exceeds its limit.
    #[arg(long, global = true)]
    pub strict: bool,
}

impl Overrides {
    /// Loads the config file (or defaults) and applies the flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
                    path: path.clone(),
                    source,
                })?;
                RunConfig::from_toml_str(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.gamma {
            cfg.ppn.gamma = v;
        }
        if let Some(v) = self.beta {
            cfg.ppn.beta = v;
        }
        if let Some(v) = self.phi_over_c2 {
            cfg.ppn.phi_over_c2 = v;
        }
        if let Some(v) = self.c {
            cfg.units.c = v;
        }
        if let Some(v) = self.seed {
            cfg.sampling.seed = v;
        }
        if let Some(v) = self.points {
            cfg.sampling.points = v;
        }
        if !self.sweep.is_empty() {
            cfg.sweep = self.sweep.iter().map(|s| s.parse()).collect::<CliResult<_>>()?;
        }
        if let Some(f) = &self.format {
            cfg.output.format = f.parse()?;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output.dir = Some(dir.to_string_lossy().into_owned());
        } else if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output.dir = Some(dir.to_string_lossy().into_owned());
        }
        cfg.trajectory.strict |= self.strict;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<CommandOutput> {
    match command {
        Command::OrderCheck => commands::order_check(cfg),
        Command::Spectrum => commands::spectrum(cfg),
        Command::Trajectory => commands::trajectory(cfg),
        Command::HamiltonianReport => commands::hamiltonian_report(cfg),
        Command::MaxwellResidual => commands::maxwell_residual(cfg),
    }
}

/// Runs the command, writes its table and returns the exit status
/// (0 all checks pass, 1 a physics check failed).
pub fn run(cli: &Cli) -> CliResult<u8> {
    let cfg = cli.overrides.resolve()?;
    let out = execute(cli.command, &cfg)?;
    let dir = PathBuf::from(cfg.output.dir.as_deref().unwrap_or("."));
    let path = out.write(&dir, cfg.output.format)?;
    for note in &out.notes {
        println!("{note}");
    }
    for warning in &out.warnings {
        eprintln!("warning: {warning}");
    }
    println!("wrote {}", path.display());
    Ok(if out.passed { 0 } else { 1 })
}
