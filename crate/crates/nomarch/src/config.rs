//! Run configuration: command-line flags layered over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Csv,
    GermanCredit,
}

impl InputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            InputFormat::Csv => "csv",
            InputFormat::GermanCredit => "german-credit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Ada,
    Aa,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::Ada => "ada",
            FitMethod::Aa => "aa",
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot parse config file {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
}

/// Every setting optional; used both for flags and for the TOML file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigOverrides {
    /// Input data file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input format.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// Field delimiter for csv input.
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Whether csv input starts with a header line.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub header: Option<bool>,
    /// Fitting method.
    #[arg(long, value_enum)]
    pub method: Option<FitMethod>,
    /// Number of archetypes.
    #[arg(long)]
    pub k: Option<usize>,
    /// Archetype-analysis restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative RSS improvement below which archetype analysis stops.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap per archetype-analysis restart.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Binarization threshold for continuous archetypes.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Variable used to color the simplex plot.
    #[arg(long)]
    pub color_var: Option<String>,
    /// Also write the encoded design matrix.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub write_encoded: Option<bool>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "NOMARCH_THREADS")]
    pub threads: Option<usize>,
}

impl ConfigOverrides {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Toml { path: path.into(), source })
    }

    /// `self` wins over `base` field by field.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            input: self.input.or(base.input),
            format: self.format.or(base.format),
            delimiter: self.delimiter.or(base.delimiter),
            header: self.header.or(base.header),
            method: self.method.or(base.method),
            k: self.k.or(base.k),
            restarts: self.restarts.or(base.restarts),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            max_iter: self.max_iter.or(base.max_iter),
            threshold: self.threshold.or(base.threshold),
            out: self.out.or(base.out),
            color_var: self.color_var.or(base.color_var),
            write_encoded: self.write_encoded.or(base.write_encoded),
            threads: self.threads.or(base.threads),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub delimiter: char,
    pub header: bool,
    pub method: FitMethod,
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub threshold: f64,
    pub out: PathBuf,
    pub color_var: Option<String>,
    pub write_encoded: bool,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, format: InputFormat, method: FitMethod) -> Self {
        RunConfig {
            input: input.into(),
            format,
            delimiter: ',',
            header: true,
            method,
            k: 10,
            restarts: 20,
            seed: 0,
            tol: 1e-6,
            max_iter: 200,
            threshold: 0.5,
            out: PathBuf::from("out"),
            color_var: None,
            write_encoded: false,
            threads: None,
        }
    }

    pub fn resolve(o: ConfigOverrides) -> Result<Self, ConfigError> {
        let input = o.input.ok_or_else(|| ConfigError::Invalid("--input is required".into()))?;
        let mut c = RunConfig::new(input, o.format.unwrap_or(InputFormat::Csv), o.method.unwrap_or(FitMethod::Ada));
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { c.$f = v; } )* };
        }
        set!(delimiter, header, k, restarts, seed, tol, max_iter, threshold, out, write_encoded);
        c.color_var = o.color_var;
        c.threads = o.threads;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.k < 1 {
            return bad("k must be at least 1");
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if self.max_iter < 1 {
            return bad("max-iter must be at least 1");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return bad("threshold must lie in [0, 1)");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        if !self.delimiter.is_ascii() {
            return bad("delimiter must be a single ASCII character");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ConfigOverrides = toml::from_str("input = \"a.csv\"\nk = 4\nseed = 3\nformat = \"german-credit\"").unwrap();
        let flags = ConfigOverrides { k: Some(6), ..Default::default() };
        let c = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!((c.k, c.seed, c.format), (6, 3, InputFormat::GermanCredit));
        assert_eq!(c.restarts, 20);
    }

    #[test]
    fn invalid_values() {
        let base = || ConfigOverrides { input: Some("x".into()), ..Default::default() };
        assert!(RunConfig::resolve(ConfigOverrides { k: Some(0), ..base() }).is_err());
        assert!(RunConfig::resolve(ConfigOverrides { threshold: Some(1.0), ..base() }).is_err());
        assert!(RunConfig::resolve(ConfigOverrides { tol: Some(0.0), ..base() }).is_err());
        assert!(RunConfig::resolve(ConfigOverrides { restarts: Some(0), ..base() }).is_err());
        assert!(RunConfig::resolve(ConfigOverrides::default()).is_err());
        assert!(RunConfig::resolve(base()).is_ok());
    }

    #[test]
    fn unknown_toml_keys_rejected() {
        assert!(toml::from_str::<ConfigOverrides>("kk = 3").is_err());
    }
}
