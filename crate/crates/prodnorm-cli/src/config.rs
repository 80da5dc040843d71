//! Flags, the optional TOML file and their merge into one resolved config.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use prodnorm::{BivariateParams, GridSpec, MethodRegistry, OrderSpec};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "prodnorm", version, about = "Densities of sums of products of correlated normals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Pdf,
    Mean,
    Sample,
    Verify,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Pdf => "pdf",
            CommandKind::Mean => "mean",
            CommandKind::Sample => "sample",
            CommandKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density of the sum of n products (or of order nu) on a grid
    Pdf(Flags),
    /// Density of the sample mean of n products on a grid
    Mean(Flags),
    /// Monte Carlo draws of the sum of n products
    Sample(Flags),
    /// Cross-checks of the representations for one parameter set
    Verify(Flags),
    /// List the density methods
    Methods,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the options below (snake_case keys); flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_y: Option<f64>,
    #[arg(long)]
    pub sigma_x: Option<f64>,
    #[arg(long)]
    pub sigma_y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Number of independent copies
    #[arg(long, conflicts_with = "order")]
    pub n: Option<u32>,
    /// Convolution order; fractional values give divisor densities
    #[arg(long)]
    pub order: Option<f64>,
    /// Density method, see `prodnorm methods`
    #[arg(long)]
    pub method: Option<String>,
    /// lo:hi:points with both endpoints included
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub output: Option<Output>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub divisibility_m: Option<u32>,
    /// Relative tolerance of the evaluators; for verify, the pass threshold of every check
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Worker threads (default: PRODNORM_THREADS, then one per core)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mu_x: Option<f64>,
    mu_y: Option<f64>,
    sigma_x: Option<f64>,
    sigma_y: Option<f64>,
    rho: Option<f64>,
    n: Option<u32>,
    order: Option<f64>,
    method: Option<String>,
    grid: Option<String>,
    output: Option<Output>,
    seed: Option<u64>,
    samples: Option<usize>,
    divisibility_m: Option<u32>,
    tolerance: Option<f64>,
    threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: CommandKind,
    pub params: BivariateParams,
    pub order: f64,
    pub method: String,
    pub grid: GridSpec,
    pub output: Output,
    pub seed: u64,
    pub samples: usize,
    pub divisibility_m: u32,
    pub tolerance: Option<f64>,
    pub threads: Option<usize>,
}

impl Resolved {
    /// The order as a number of copies, for commands that need one.
    pub fn copies(&self) -> Result<u32, CliError> {
        let n = self.order;
        if n >= 1.0 && n.fract() == 0.0 && n <= u32::MAX as f64 {
            Ok(n as u32)
        } else {
            Err(CliError::Validation(format!(
                "{} needs a whole number of copies, got order {n}",
                self.command.name()
            )))
        }
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec, CliError> {
    let bad = || CliError::Validation(format!("grid '{s}' is not lo:hi:points"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, points] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let points: usize = points.trim().parse().map_err(|_| bad())?;
    GridSpec::new(lo, hi, points).map_err(|e| CliError::Validation(e.to_string()))
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        let msg = e.message().to_string();
        CliError::Validation(format!("config {}: {msg}", path.display()))
    })
}

pub fn resolve(command: CommandKind, flags: &Flags, env_threads: Option<&str>) -> Result<Resolved, CliError> {
    let file = match &flags.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let params = BivariateParams::new(
        flags.mu_x.or(file.mu_x).unwrap_or(0.0),
        flags.mu_y.or(file.mu_y).unwrap_or(0.0),
        flags.sigma_x.or(file.sigma_x).unwrap_or(1.0),
        flags.sigma_y.or(file.sigma_y).unwrap_or(1.0),
        flags.rho.or(file.rho).unwrap_or(0.0),
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;

    // a flag of either kind replaces both keys from the file
    let order = match (flags.n, flags.order) {
        (Some(n), _) => n as f64,
        (None, Some(v)) => v,
        (None, None) => match (file.n, file.order) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("config sets both n and order".into()));
            }
            (Some(n), None) => n as f64,
            (None, Some(v)) => v,
            (None, None) => 1.0,
        },
    };
    OrderSpec::new(order).map_err(|e| CliError::Validation(e.to_string()))?;

    let method = flags.method.clone().or(file.method).unwrap_or_else(|| "auto".into());
    MethodRegistry::with_builtins()
        .get(&method)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let grid = parse_grid(flags.grid.as_deref().or(file.grid.as_deref()).unwrap_or("-5:5:101"))?;

    let tolerance = flags.tolerance.or(file.tolerance);
    if let Some(t) = tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Validation(format!("tolerance {t} must be positive")));
        }
    }
    let divisibility_m = flags.divisibility_m.or(file.divisibility_m).unwrap_or(2);
    if divisibility_m == 0 {
        return Err(CliError::Validation("divisibility-m must be at least 1".into()));
    }

    let threads = match flags.threads.or(file.threads) {
        Some(t) => Some(t),
        None => match env_threads {
            Some(s) => Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Validation(format!("PRODNORM_THREADS='{s}' is not a count")))?,
            ),
            None => None,
        },
    };
    if threads == Some(0) {
        return Err(CliError::Validation("thread count must be positive".into()));
    }

    Ok(Resolved {
        command,
        params,
        order,
        method,
        grid,
        output: flags.output.or(file.output).unwrap_or(Output::Csv),
        seed: flags.seed.or(file.seed).unwrap_or(0x5eed),
        samples: flags.samples.or(file.samples).unwrap_or(100_000),
        divisibility_m,
        tolerance,
        threads,
    })
}
