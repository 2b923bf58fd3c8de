//! Command-line front end: simulate scenarios, optimise lockdown timing,
//! scan budget grids and render the standard figures.

pub mod commands;
pub mod error;
pub mod figures;
pub mod plot;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, Result};
pub use scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "lockdown", version, about = "Optimal lockdown timing for SIR epidemics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the scenario's strategy and write the trajectory.
    Simulate(CommonArgs),
    /// Find the best single lockdown for the scenario's budget.
    Optimize(CommonArgs),
    /// Optimise every point of the scenario's budget grid.
    Scan(CommonArgs),
    /// Compute the data for a standard figure and render it.
    Figure {
        name: FigureName,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML); defaults are used when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "LOCKDOWN_OUT_DIR", default_value = "out")]
    pub out: PathBuf,
    /// Integration step in days, overriding the scenario.
    #[arg(long)]
    pub step: Option<f64>,
    /// Start-time tolerance of the optimiser, in days.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig1 => "fig1",
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
        }
    }
}

impl CommonArgs {
    /// Loads the scenario and applies command-line overrides.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut scenario = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        if let Some(step) = self.step {
            scenario.solver.step = step;
            scenario.solver.validate().map_err(|source| CliError::Field { field: "--step", source })?;
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Invalid(format!("--tol = {} must be > 0", self.tol)));
        }
        Ok(scenario)
    }
}

/// Runs one command and returns the summary line for stdout.
pub fn run(cli: &Cli) -> Result<String> {
    let value = match &cli.command {
        Command::Simulate(args) => commands::simulate(&args.scenario()?, &args.out)?,
        Command::Optimize(args) => commands::optimize(&args.scenario()?, &args.out, args.tol)?,
        Command::Scan(args) => commands::scan(&args.scenario()?, &args.out, args.tol)?,
        Command::Figure { name, common } => figures::render(*name, &common.scenario()?, &common.out, common.tol)?,
    };
    Ok(value.to_string())
}
