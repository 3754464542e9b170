//! Command-line front end for `measheat`: resolves scenarios from JSON files
//! and flags, runs the sweeps and writes CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{
    Custom, ExcessSweep, Format, Initial, Kind, LambdaSweep, Overrides, Scenario, SteadySweep, Transient,
};
use crate::error::CliError;
use crate::output::{write_file, Report};

#[derive(Debug, Parser)]
#[command(name = "measheat", version, about = "Heat exchange between a measured qubit and its environment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON scenario file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Integration step in units of 1/Delta.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Integration horizon in units of 1/Delta.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    /// Number of points of the theta grid over [0, pi].
    #[arg(long, global = true)]
    pub theta_points: Option<usize>,
    /// Measurement strength; repeat for several values.
    #[arg(long = "gamma", global = true, value_name = "GAMMA")]
    pub gammas: Vec<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also write `<out>.gp`, a gnuplot script for the CSV.
    #[arg(long, global = true)]
    pub gnuplot_script: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Steady-state current against theta.
    Fig2b,
    /// Transient current starting from <sigma_x> = 1.
    Fig4a,
    /// Transient current after switching on the measurement.
    Fig4b,
    /// Excess heat against theta.
    Qex,
    /// Steady-state current of the three-level model against gamma.
    Lambda,
    /// Run the scenario given by --config, whatever its kind.
    Run,
    /// Oracle cross-checks.
    Selftest,
}

impl Command {
    fn kind(self) -> Option<Kind> {
        match self {
            Command::Fig2b => Some(Kind::SteadySweepTheta),
            Command::Fig4a | Command::Fig4b => Some(Kind::Transient),
            Command::Qex => Some(Kind::ExcessSweepTheta),
            Command::Lambda => Some(Kind::LambdaSweepGamma),
            Command::Run | Command::Selftest => None,
        }
    }
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format,
            dt: self.dt,
            t_end: self.t_end,
            theta_points: self.theta_points,
            gammas: self.gammas.clone(),
        }
    }

    /// File contents (if any) with flags applied on top.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = match &self.config {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        if let (Some(expected), Some(found)) = (self.command.kind(), s.kind) {
            if expected != found {
                return Err(CliError::Config(format!(
                    "kind: file declares '{}' but this subcommand runs '{}'",
                    found.name(),
                    expected.name()
                )));
            }
        }
        s.apply(&self.overrides());
        Ok(s)
    }
}

pub fn report_for(command: Command, s: &Scenario) -> Result<Report, CliError> {
    let kind = match command {
        Command::Selftest => return Ok(selftest::run_selftest()),
        Command::Run => s
            .kind
            .ok_or_else(|| CliError::Config("kind: required by 'run'".into()))?,
        other => other.kind().expect("figure subcommands have a kind"),
    };
    match kind {
        Kind::SteadySweepTheta => commands::run_fig2b(&SteadySweep::resolve(s)?),
        Kind::Transient => {
            let initial = if command == Command::Fig4a {
                Initial::SigmaXPlus
            } else {
                Initial::MeasurementFree
            };
            commands::run_fig4(&Transient::resolve(s, initial)?)
        }
        Kind::ExcessSweepTheta => commands::run_qex(&ExcessSweep::resolve(s)?),
        Kind::LambdaSweepGamma => commands::run_lambda(&LambdaSweep::resolve(s)?),
        Kind::CustomLindblad => commands::run_custom(&Custom::resolve(s)?),
    }
}

/// Runs the command and writes its output. Row-level failures surface as an
/// error after everything has been written.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.command == Command::Run && cli.config.is_none() {
        return Err(CliError::Config("--config is required by 'run'".into()));
    }
    let scenario = cli.scenario()?;
    let out = scenario.output_path().map(PathBuf::from);
    if cli.gnuplot_script && (out.is_none() || scenario.format() != Format::Csv) {
        return Err(CliError::Config("--gnuplot-script needs CSV output written to --out".into()));
    }

    let report = report_for(cli.command, &scenario)?;
    let text = match scenario.format() {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &out {
        Some(path) => {
            write_file(path, &text)?;
            if cli.gnuplot_script {
                let script = path.with_extension("gp");
                write_file(&script, &report.gnuplot_script(path))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(report.failures.join("\n")))
    }
}
