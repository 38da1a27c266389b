//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigOverrides, RunConfig};
use crate::pipeline::{self, RunError};

#[derive(Debug, Parser)]
#[command(name = "nomarch", version, about = "Archetypoid analysis of nominal questionnaire data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit archetypoids (or archetypes) and write model.json and profiles.csv.
    Fit(Common),
    /// Evaluate a fitted model: Hamming distances, summary, coverage, plot.
    Report(WithModel),
    /// Draw the simplex plot of a fitted model.
    Plot(WithModel),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file with default settings; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

#[derive(Debug, Args)]
pub struct WithModel {
    /// Model file written by `fit` [default: <out>/model.json].
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

impl Common {
    pub fn resolve(self) -> Result<RunConfig, RunError> {
        let base = match &self.config {
            Some(path) => ConfigOverrides::from_toml_file(path)?,
            None => ConfigOverrides::default(),
        };
        Ok(RunConfig::resolve(self.overrides.over(base))?)
    }
}

fn model_path(model: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    model.unwrap_or_else(|| config.out.join("model.json"))
}

/// Runs one command, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Fit(common) => {
            let config = common.resolve()?;
            let (fitted, written) = pipeline::run_fit(&config)?;
            println!("{} k={} rss={}", config.method.as_str(), config.k, crate::formats::fmt_num(fitted.rss()));
            for p in written.0 {
                println!("wrote {}", p.display());
            }
        }
        Command::Report(WithModel { model, common }) => {
            let config = common.resolve()?;
            let model = model_path(model, &config);
            let (report, written) = pipeline::run_report(&config, &model)?;
            println!("{} total={} covered={}", report.method.as_str(), report.total, report.all_covered());
            for p in written.0 {
                println!("wrote {}", p.display());
            }
        }
        Command::Plot(WithModel { model, common }) => {
            let config = common.resolve()?;
            let model = model_path(model, &config);
            for p in pipeline::run_plot(&config, &model)?.0 {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
