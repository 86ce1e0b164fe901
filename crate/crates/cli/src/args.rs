use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use speclab_core::blockops::BlockSequenceSpec;
use speclab_core::fourier_pde::PdeOperator;
use speclab_core::study::{OperatorFamily, OutputFormat};
use speclab_core::toeplitz::{PerturbationSpec, ToeplitzSymbol};
use speclab_core::{ComplexPoint, GridSpec, SpeclabError};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "speclab",
    version,
    about = "Spectra and pseudospectra of operator truncations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Truncation size.
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Truncation sizes for a study, comma separated and strictly increasing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,

    /// Sampling grid as x0,x1,y0,y1,nx,ny.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,

    /// Pseudospectral levels, comma separated and strictly decreasing.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,

    /// Output file; JSON goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format: json, csv or svg. Inferred from the --out extension when omitted
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,

    /// Worker threads for grid sweeps.
    #[arg(long, global = true, env = "SPECLAB_THREADS")]
    pub threads: Option<usize>,

    /// Seed for the synthetic fixture family.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON file with defaults for any of these flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite sections of a banded Toeplitz operator, by default the fish
    /// symbol with the rank-10 perturbation.
    Toeplitz {
        /// Drop the finite-rank perturbation.
        #[arg(long)]
        unperturbed: bool,
    },
    /// Block-diagonal plus off-diagonal operators and their limit-set estimates.
    Blockdiag {
        #[arg(long, value_enum, default_value_t = BuiltinBlocks::Example1)]
        builtin: BuiltinBlocks,
        /// Diagonal limit `d` of the Example-1 family.
        #[arg(long, allow_hyphen_values = true)]
        d: Option<f64>,
        /// Tail depth K for the limit-set estimates.
        #[arg(long, default_value_t = 2048)]
        k_blocks: usize,
        /// Divergence threshold of the essential-spectrum estimate.
        #[arg(long, default_value_t = 1e3)]
        threshold: f64,
        /// Clustering tolerance of the near-spectrum estimate is `tol / eps`.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Skip the limit-set estimates.
        #[arg(long)]
        no_limits: bool,
    },
    /// The delay-differential operator and its exact truncation spectra.
    Delay {
        /// Check the constant-resolvent-norm region at this point (re,im).
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<Point>,
        /// Largest block index for the closed-form block norms.
        #[arg(long, default_value_t = 200)]
        j_max: usize,
    },
    /// Periodic domain truncations of a differential operator with a potential.
    Pde {
        /// Replace the potential with zero.
        #[arg(long)]
        free: bool,
    },
    /// The periodic first-derivative example, whose pseudospectra miss the
    /// right half-plane.
    DerivDemo {
        /// Point whose distance to the flagged set is reported (re,im).
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        lambda: Point,
    },
    /// Convergence study across truncation sizes with pollution verdicts.
    Study {
        /// Built-in family; a `family` object in the config file overrides it.
        #[arg(long, value_enum)]
        family: Option<BuiltinFamily>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuiltinBlocks {
    Example1,
    Delay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuiltinFamily {
    Toeplitz,
    Delay,
    Blocks,
    Pde,
    Synthetic,
}

/// A complex number written as `re,im` or a single real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point(pub ComplexPoint);

impl FromStr for Point {
    type Err = SpeclabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SpeclabError::Validation(format!("expected re,im, got {s:?}"));
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [re] => Ok(Point(ComplexPoint::new(re, 0.0))),
            [re, im] => Ok(Point(ComplexPoint::new(re, im))),
            _ => Err(bad()),
        }
    }
}

/// Grid in a config file: the flag syntax as a string, or an object.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ConfigGrid {
    Text(String),
    Spec(GridSpec),
}

/// Contents of `--config`. Keys mirror the flags; operator descriptions
/// can only be given here.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    grid: Option<ConfigGrid>,
    pub eps: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub family: Option<OperatorFamily>,
    pub symbol: Option<ToeplitzSymbol>,
    pub perturbation: Option<PerturbationSpec>,
    pub blocks: Option<BlockSequenceSpec>,
    pub operator: Option<PdeOperator>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Flags merged over the config file.
#[derive(Debug)]
pub struct Settings {
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub grid: Option<GridSpec>,
    pub eps: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub family: Option<OperatorFamily>,
    pub symbol: Option<ToeplitzSymbol>,
    pub perturbation: Option<PerturbationSpec>,
    pub blocks: Option<BlockSequenceSpec>,
    pub operator: Option<PdeOperator>,
}

impl Settings {
    pub fn resolve(common: CommonArgs) -> CliResult<Self> {
        let config = match &common.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let config_grid = match config.grid {
            None => None,
            Some(ConfigGrid::Spec(g)) => Some(g),
            Some(ConfigGrid::Text(s)) => Some(s.parse()?),
        };
        let config_format = config.format.as_deref().map(str::parse).transpose()?;
        let format = common.format.or(config_format);
        let out = common.out.or(config.out);
        let format = match format {
            Some(f) => f,
            None => out
                .as_deref()
                .and_then(|p| p.extension())
                .and_then(|e| e.to_str())
                .and_then(|e| e.parse().ok())
                .unwrap_or(OutputFormat::Json),
        };
        Ok(Self {
            n: common.n.or(config.n),
            n_list: common.n_list.or(config.n_list),
            grid: common.grid.or(config_grid),
            eps: common.eps.or(config.eps),
            out,
            format,
            threads: common.threads.or(config.threads),
            seed: common.seed.or(config.seed),
            family: config.family,
            symbol: config.symbol,
            perturbation: config.perturbation,
            blocks: config.blocks,
            operator: config.operator,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_negative_grid_and_lists() {
        let cli = Cli::try_parse_from([
            "speclab",
            "study",
            "--family",
            "delay",
            "--grid",
            "-10,10,-10,10,41,41",
            "--n-list",
            "5,10,20",
            "--eps",
            "1,0.5",
        ])
        .unwrap();
        assert_eq!(cli.common.grid.unwrap().x0, -10.0);
        assert_eq!(cli.common.n_list.unwrap(), vec![5, 10, 20]);
        assert_eq!(cli.common.eps.unwrap(), vec![1.0, 0.5]);
    }

    #[test]
    fn point_syntax() {
        assert_eq!("0,5".parse::<Point>().unwrap().0, ComplexPoint::new(0.0, 5.0));
        assert_eq!("-2".parse::<Point>().unwrap().0, ComplexPoint::new(-2.0, 0.0));
        assert!("1,2,3".parse::<Point>().is_err());
        assert!("x".parse::<Point>().is_err());
    }

    #[test]
    fn format_follows_extension() {
        let cli = Cli::try_parse_from(["speclab", "delay", "--out", "a.svg"]).unwrap();
        assert_eq!(Settings::resolve(cli.common).unwrap().format, OutputFormat::Svg);
        let cli = Cli::try_parse_from(["speclab", "delay", "--out", "a.svg", "--format", "json"]).unwrap();
        assert_eq!(Settings::resolve(cli.common).unwrap().format, OutputFormat::Json);
    }
}
