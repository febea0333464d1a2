use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pdd", version, about = "Penalty dual decomposition solvers for multicast, relay and VolMin problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Solve one instance; writes result.json and trace.csv.
    Solve(SolveArgs),
    /// Solve one problem per seed and write a summary CSV.
    Bench(BenchArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum App {
    Multicast,
    Relay,
    Volmin,
}

impl App {
    pub fn name(self) -> &'static str {
        match self {
            App::Multicast => "multicast",
            App::Relay => "relay",
            App::Volmin => "volmin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pdd,
    Ipdd,
}

/// Random instance parameters.
#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// Problem dimensions: multicast `N_t,n_g,m_g`; relay `N_s,N_r,K`;
    /// volmin `N,K,L`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub dims: Option<Vec<usize>>,

    /// Transmit power in dB: multicast `P_BS`, relay `P_S = P_R`.
    #[arg(long, default_value_t = 10.0)]
    pub power_db: f64,

    /// VolMin noise level in dB; `inf` for noiseless data.
    #[arg(long, default_value = "inf")]
    pub snr_db: f64,

    /// VolMin cap on the simplex coefficients.
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
}

/// Solver settings. Flags override the `--config` file, which overrides
/// the application defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON object with any subset of the solver settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    #[arg(long)]
    pub outer_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// VolMin random restarts.
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// VolMin: rescale the data so that σ_K(A) is well above √ε.
    #[arg(long)]
    pub prescale: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub app: App,
    #[command(flatten)]
    pub gen: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file. VolMin writes CSV for a `.csv` path and the binary
    /// format otherwise, plus the ground truth next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub app: App,
    /// Instance file. Only VolMin accepts `--dims` alongside it, to give
    /// the number of vertices `K`.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GeneratorArgs,
    /// VolMin ground truth, enabling the MSE report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub app: App,
    /// Instance file shared by every seed; seeds then only vary the
    /// solver's random start.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GeneratorArgs,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Seed list such as `1..10` (inclusive) or `3,7,11`.
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: SeedList,
    /// Summary CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// numerics, pdd-core, multicast, relay, volmin or all.
    #[arg(default_value = "all")]
    pub suite: String,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let seeds = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad seed range start {a:?}: {e}"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad seed range end {b:?}: {e}"))?;
        if b < a {
            return Err(format!("empty seed range {s}"));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|e| format!("bad seed {t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if seeds.is_empty() {
        return Err("need at least one seed".into());
    }
    Ok(SeedList(seeds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..4").unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("1..=2").unwrap().0, vec![1, 2]);
        assert_eq!(parse_seeds("5, 2,9").unwrap().0, vec![5, 2, 9]);
        assert!(parse_seeds("4..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
