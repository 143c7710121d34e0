//! Argument parsing, the JSON config-file alternative, and the merge rule:
//! explicit flags override file values, file values override defaults.

use clap::{Args, Parser, Subcommand};
use momdens::{Error, Result};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "momdens",
    version,
    about = "Moment-type density and survival estimation for biased samples",
    after_help = "A JSON config file (--config) may supply any flag value, including the \
                  command itself; explicit flags win."
)]
pub struct Cli {
    /// JSON config file; explicit flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Density estimate curve from a scenario sample or a data file.
    Estimate(CommonArgs),
    /// Survival estimate curve.
    Survival(CommonArgs),
    /// Monte Carlo bias/variance/MSE table over a grid of sample sizes.
    Mse(CommonArgs),
    /// MSE rate experiment: Monte Carlo table plus a log-log slope fit.
    Rate(CommonArgs),
    /// Kolmogorov-Smirnov normality experiment for standardized replicates.
    Normality(CommonArgs),
    /// Moment-type vs kernel-type estimator curves on one shared sample.
    Compare(CommonArgs),
    /// Pinned length-biased showcase: n = 300 density curves.
    Figure1(FigureArgs),
    /// Pinned excess-life showcase: n = 400 survival curves.
    Figure2(FigureArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Built-in scenario (lb-exp2 | excess-gamma22).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Data file: one positive observation per line, `#` starts a comment.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Estimator (star | basic | survival | jones-density | jones-survival).
    #[arg(long)]
    pub estimator: Option<String>,
    /// Comparison baseline family; `jones` is the only one implemented.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Smoothing rule: `fixed:<v> | global:<d> | local-density:<d> | local-survival:<d>`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Bandwidth exponent beta for the kernel baseline, h = n^-beta.
    #[arg(long)]
    pub bandwidth_exp: Option<f64>,
    /// Evaluation grid as min:max:count.
    #[arg(long)]
    pub grid: Option<String>,
    /// Sample size(s), comma separated.
    #[arg(long)]
    pub n: Option<String>,
    /// Evaluation point(s), comma separated.
    #[arg(long)]
    pub x: Option<String>,
    /// Monte Carlo replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Root seed for all sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (default: `<command>.csv` under `$MOMDENS_OUT_DIR` or
    /// the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Total-weight mode for the moment-type estimators (known | estimated).
    #[arg(long)]
    pub weight: Option<String>,
    /// Explicit total weight for data-file models.
    #[arg(long)]
    pub weight_value: Option<f64>,
    /// Sampling model for data-file input (length-biased | direct).
    #[arg(long)]
    pub model: Option<String>,
    /// Clamp survival estimates into [0, 1] in the CSV output.
    #[arg(long)]
    pub clamp_survival: bool,
    /// Normality centering (exact-mean | true-value).
    #[arg(long)]
    pub centering: Option<String>,
    /// Normality scaling (exact-variance | theory-variance).
    #[arg(long)]
    pub scaling: Option<String>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct FigureArgs {
    /// Root seed for the pinned sample.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The JSON mirror of the flag set.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub scenario: Option<String>,
    pub input: Option<PathBuf>,
    pub estimator: Option<String>,
    pub baseline: Option<String>,
    pub alpha: Option<String>,
    pub bandwidth_exp: Option<f64>,
    pub grid: Option<String>,
    pub n: Option<NumberList>,
    pub x: Option<FloatList>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub weight: Option<String>,
    pub weight_value: Option<f64>,
    pub model: Option<String>,
    pub clamp_survival: Option<bool>,
    pub centering: Option<String>,
    pub scaling: Option<String>,
}

/// Accepts either a JSON array or the flag's comma string.
#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum NumberList {
    List(Vec<usize>),
    Text(String),
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum FloatList {
    List(Vec<f64>),
    Text(String),
}

pub fn load_file_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Error::Config(format!("cannot read config file {}: {e}", p.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                Error::Config(format!("cannot parse config file {}: {e}", p.display()))
            })
        }
    }
}

impl CommonArgs {
    /// Fill every unset flag from the file config.
    pub fn merged_with(mut self, file: &FileConfig) -> Self {
        self.scenario = self.scenario.or_else(|| file.scenario.clone());
        self.input = self.input.or_else(|| file.input.clone());
        self.estimator = self.estimator.or_else(|| file.estimator.clone());
        self.baseline = self.baseline.or_else(|| file.baseline.clone());
        self.alpha = self.alpha.or_else(|| file.alpha.clone());
        self.bandwidth_exp = self.bandwidth_exp.or(file.bandwidth_exp);
        self.grid = self.grid.or_else(|| file.grid.clone());
        self.n = self.n.or_else(|| {
            file.n.as_ref().map(|l| match l {
                NumberList::List(v) => v
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                NumberList::Text(t) => t.clone(),
            })
        });
        self.x = self.x.or_else(|| {
            file.x.as_ref().map(|l| match l {
                FloatList::List(v) => v
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                FloatList::Text(t) => t.clone(),
            })
        });
        self.replicates = self.replicates.or(file.replicates);
        self.seed = self.seed.or(file.seed);
        self.out = self.out.or_else(|| file.out.clone());
        self.weight = self.weight.or_else(|| file.weight.clone());
        self.weight_value = self.weight_value.or(file.weight_value);
        self.model = self.model.or_else(|| file.model.clone());
        self.clamp_survival = self.clamp_survival || file.clamp_survival.unwrap_or(false);
        self.centering = self.centering.or_else(|| file.centering.clone());
        self.scaling = self.scaling.or_else(|| file.scaling.clone());
        self
    }
}

impl FigureArgs {
    pub fn merged_with(mut self, file: &FileConfig) -> Self {
        self.seed = self.seed.or(file.seed);
        self.out = self.out.or_else(|| file.out.clone());
        self
    }
}

pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("'{t}' is not a sample size")))
        })
        .collect()
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("'{t}' is not a number")))
        })
        .collect()
}

/// Parse `min:max:count` into an evenly spaced grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "grid '{text}' must have the form min:max:count"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("grid min '{}' is not a number", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("grid max '{}' is not a number", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("grid count '{}' is not an integer", parts[2])))?;
    if min.is_nan() || min <= 0.0 || max.is_nan() || max <= min || count < 2 {
        return Err(Error::Config(format!(
            "grid '{text}' needs 0 < min < max and count >= 2"
        )));
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count).map(|i| min + i as f64 * step).collect())
}
