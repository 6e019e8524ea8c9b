//! Command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cluster",
    version,
    about = "K-means clustering in single-worker, multi-worker and offload regimes",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time the same clustering under each allowed regime and worker count.
    Bench(BenchArgs),
}

/// Where the samples come from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Comma-separated numeric file, one sample per row.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Generate Gaussian blobs instead (seeded by --seed).
    #[arg(long, value_name = "N,M,K_TRUE,SPREAD")]
    pub synthetic: Option<SyntheticSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub m: usize,
    pub k_true: usize,
    pub spread: f64,
}

impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [n, m, k, spread] = parts[..] else {
            return Err(format!("expected N,M,K_TRUE,SPREAD, got {s:?}"));
        };
        let int = |v: &str, what: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("{what} must be an integer, got {v:?}"))
        };
        Ok(Self {
            n: int(n, "N")?,
            m: int(m, "M")?,
            k_true: int(k, "K_TRUE")?,
            spread: spread
                .parse()
                .map_err(|_| format!("SPREAD must be a number, got {spread:?}"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Maximin,
    RandomFar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Auto,
    Single,
    Multi,
    Gpu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AutoPreferArg {
    MostParallel,
    Multi,
}

/// Flags shared by runs and benchmarks.
#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub source: Source,
    /// The input's first line is a header.
    #[arg(long)]
    pub header: bool,
    /// The input's first column is an identifier, not a feature.
    #[arg(long)]
    pub id_column: bool,
    /// Number of clusters.
    #[arg(long, required = true)]
    pub k: Option<usize>,
    /// Largest center movement still treated as converged; 0 = exact.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Maximin)]
    pub init: InitArg,
    /// Worker count for parallel regimes [default: hardware parallelism].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Offload device (reference or gpu). Without one the gpu regime is
    /// unavailable.
    #[arg(long, value_name = "NAME")]
    pub device: Option<String>,
    /// Cap automatic selection at the multi-worker regime.
    #[arg(long, value_enum, default_value_t = AutoPreferArg::MostParallel)]
    pub auto_prefer: AutoPreferArg,
    /// Rows per device job.
    #[arg(long)]
    pub job_rows: Option<usize>,
    /// Rows per accumulation block. Results are only bit-comparable between
    /// runs with the same value.
    #[arg(long)]
    pub block_rows: Option<usize>,
    /// Estimate the diameter from this many sampled pairs when n > 100 000
    /// instead of scanning every pair.
    #[arg(long, value_name = "PAIRS")]
    pub diameter_pairs: Option<u64>,
    /// Give multi-worker diameter scans equal pair counts per worker.
    #[arg(long)]
    pub balanced_pairs: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    pub regime: RegimeArg,
    #[arg(long, value_name = "PATH")]
    pub labels_out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub centers_out: Option<PathBuf>,
    /// JSON run report; printed to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Worker counts to sweep for the parallel regimes.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub workers: Option<Vec<usize>>,
    /// Restrict the sweep to these regimes (single is always measured).
    #[arg(long, value_delimiter = ',', value_enum, value_name = "LIST")]
    pub regimes: Option<Vec<RegimeArg>>,
    /// Runs per cell; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// JSON bench report; printed to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report_out: Option<PathBuf>,
    /// Corrupt one label of the last run (harness self-test).
    #[arg(long, hide = true)]
    pub inject_mismatch: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn synthetic_spec() {
        assert_eq!(
            "100, 2,3,0.5".parse::<SyntheticSpec>(),
            Ok(SyntheticSpec {
                n: 100,
                m: 2,
                k_true: 3,
                spread: 0.5
            })
        );
        assert!("100,2,3".parse::<SyntheticSpec>().is_err());
        assert!("a,2,3,1".parse::<SyntheticSpec>().is_err());
    }

    #[test]
    fn run_flags() {
        let cli = Cli::try_parse_from([
            "cluster",
            "--synthetic",
            "10,2,2,1",
            "--k",
            "2",
            "--regime",
            "single",
        ])
        .unwrap();
        assert!(cli.command.is_none());
        assert_eq!(cli.run.regime, RegimeArg::Single);
        assert_eq!(cli.run.common.k, Some(2));
    }

    #[test]
    fn bench_flags() {
        let cli = Cli::try_parse_from([
            "cluster",
            "bench",
            "--synthetic",
            "10,2,2,1",
            "--k",
            "2",
            "--workers",
            "1,2,4",
        ])
        .unwrap();
        let Some(Command::Bench(b)) = cli.command else {
            panic!()
        };
        assert_eq!(b.workers, Some(vec![1, 2, 4]));
        assert_eq!(b.repeats, 3);
    }

    #[test]
    fn source_is_required_and_exclusive() {
        assert!(Cli::try_parse_from(["cluster", "--k", "2"]).is_err());
        assert!(Cli::try_parse_from([
            "cluster",
            "--input",
            "a.csv",
            "--synthetic",
            "1,1,1,1",
            "--k",
            "2"
        ])
        .is_err());
        assert!(Cli::try_parse_from(["cluster", "--input", "a.csv"]).is_err());
    }
}
