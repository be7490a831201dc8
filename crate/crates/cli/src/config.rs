//! Command-line flags, the optional TOML config file, and their merge.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use simplex_pa::validate::DEFAULT_SEED;
use simplex_pa::ModelParams;

/// Environment variable naming a TOML file with defaults for any flag.
pub const CONFIG_ENV: &str = "SIMPLEX_PA_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "simplex-pa", version, about = "Preferential-attachment random simplicial complexes")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Grow complexes and write degree-count snapshots with an invariant report.
    Simulate,
    /// Solve the joint and marginal recursions for the limiting degree law.
    Recursion,
    /// Draw from the limiting degree law.
    LimitSample,
    /// Evaluate the limiting pgf on a grid by quadrature, table sum and Monte Carlo.
    Pgf,
    /// Tail measure of boxes for the limiting degree vector.
    Tail,
    /// Run the continuous-time birth-immigration construction.
    Bi,
    /// Run validation suites and report pass/fail with measured values.
    Validate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Simplex dimension.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Attachment offset, must exceed -1.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Number of growth steps or events.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Number of Monte Carlo samples.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicates: Option<u64>,
    /// Truncation cap on the largest degree coordinate.
    #[arg(long, global = true)]
    pub cap: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Validation suite; repeat or separate with commas. All suites when absent.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default)]
    pub suite: Vec<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub replicates: u64,
    pub cap: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub suites: Vec<String>,
    pub threads: Option<usize>,
}

pub fn load_file(path: &Path) -> Result<Flags> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RunConfig {
    /// Flags take precedence over the file, the file over built-in defaults.
    pub fn resolve(command: Command, flags: Flags, file: Option<Flags>) -> Result<Self> {
        let file = file.unwrap_or_default();
        let k = flags.k.or(file.k).unwrap_or(1);
        let delta = flags.delta.or(file.delta).unwrap_or(0.0);
        let params = ModelParams::new(k, delta)?;
        let replicates = flags.replicates.or(file.replicates).unwrap_or(1);
        if replicates == 0 {
            bail!("--replicates must be at least 1");
        }
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            bail!("--threads must be at least 1");
        }
        Ok(Self {
            command,
            params,
            n: flags.n.or(file.n).unwrap_or(1_000),
            samples: flags.samples.or(file.samples).unwrap_or(10_000),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            replicates,
            cap: flags.cap.or(file.cap),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format).unwrap_or(Format::Json),
            suites: if flags.suite.is_empty() { file.suite } else { flags.suite },
            threads,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let file: Flags = toml::from_str("k = 2\ndelta = 0.5\nseed = 9\nformat = \"csv\"").unwrap();
        let flags = Flags { k: Some(3), ..Flags::default() };
        let c = RunConfig::resolve(Command::Simulate, flags, Some(file)).unwrap();
        assert_eq!(c.params.k(), 3);
        assert_eq!(c.params.delta(), 0.5);
        assert_eq!(c.seed, 9);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.n, 1_000);
    }

    #[test]
    fn rejects_bad_values() {
        let flags = Flags { delta: Some(-1.0), ..Flags::default() };
        assert!(RunConfig::resolve(Command::Simulate, flags, None).is_err());
        assert!(toml::from_str::<Flags>("kk = 1").is_err());
    }
}
