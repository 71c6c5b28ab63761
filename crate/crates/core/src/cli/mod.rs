//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    example1_experiment, ill_conditioning_sweep, run_monte_carlo, write_csv_to, BenchError, MonteCarloConfig,
    Scenario, DEFAULT_SEED,
};
use crate::filters::{FilterKind, KernelConfig};
use crate::model::{InitialState, NoiseCase, NoiseParams, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mcckf", version, about = "Monte Carlo benchmarks for maximum-correntropy Kalman filters")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vehicle tracking benchmark under both noise cases.
    Example1(CommonArgs),
    /// Ill-conditioning sweep over δ = 10^-e.
    Example2 {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated exponents e.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
        delta_exponents: Vec<u32>,
    },
    /// Model and noise read from a TOML scenario file.
    Custom {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Case1,
    Case2,
    Both,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Time steps per trial.
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KernelMode::Adaptive)]
    pub kernel: KernelMode,
    /// Kernel bandwidth for `--kernel fixed`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated filter names.
    #[arg(long, value_delimiter = ',', default_value = "mcc-kf,mcc-kf-lemma,imcc-kf,sr-imcc-kf,esr-imcc-kf")]
    pub filters: Vec<FilterKind>,
    /// Noise case for example2 (example1 always runs both).
    #[arg(long, value_enum, default_value_t = CaseArg::Both)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 0.1)]
    pub shot_prob: f64,
    #[arg(long, default_value_t = 10.0)]
    pub shot_scale: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mixture_weight: f64,
    /// Draw the true initial state from N(x0, P0) instead of using x0.
    #[arg(long)]
    pub sample_initial_state: bool,
    /// Fill the mean_step_seconds column (makes output run-dependent).
    #[arg(long)]
    pub record_timing: bool,
}

enum CliError {
    Usage(String),
    Io(String),
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CommonArgs {
    fn kernel(&self) -> Result<KernelConfig, CliError> {
        match (self.kernel, self.sigma) {
            (KernelMode::Adaptive, None) => Ok(KernelConfig::Adaptive),
            (KernelMode::Adaptive, Some(_)) => Err(CliError::Usage("--sigma requires --kernel fixed".into())),
            (KernelMode::Fixed, Some(s)) => {
                KernelConfig::fixed(s).ok_or_else(|| CliError::Usage("--sigma must be positive and finite".into()))
            }
            (KernelMode::Fixed, None) => Err(CliError::Usage("--kernel fixed requires --sigma".into())),
        }
    }

    fn noise_params(&self) -> Result<NoiseParams, CliError> {
        if !(0.0..=1.0).contains(&self.shot_prob) {
            return Err(CliError::Usage("--shot-prob must lie in [0, 1]".into()));
        }
        if !(self.shot_scale >= 0.0 && self.shot_scale.is_finite()) {
            return Err(CliError::Usage("--shot-scale must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.mixture_weight) {
            return Err(CliError::Usage("--mixture-weight must lie in [0, 1]".into()));
        }
        Ok(NoiseParams {
            shot_prob: self.shot_prob,
            shot_scale: self.shot_scale,
            mixture_weight: self.mixture_weight,
        })
    }

    fn config(&self) -> Result<MonteCarloConfig, CliError> {
        let cfg = MonteCarloConfig {
            trials: self.trials,
            steps: self.steps,
            master_seed: self.seed,
            filters: self.filters.clone(),
            kernel: self.kernel()?,
            initial_state: if self.sample_initial_state {
                InitialState::Sampled
            } else {
                InitialState::Mean
            },
            record_timing: self.record_timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn cases(&self) -> Vec<NoiseCase> {
        match self.case {
            CaseArg::Case1 => vec![NoiseCase::Case1],
            CaseArg::Case2 => vec![NoiseCase::Case2],
            CaseArg::Both => vec![NoiseCase::Case1, NoiseCase::Case2],
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, reports) = match cli.command {
        Command::Example1(common) => {
            let cfg = common.config()?;
            let params = common.noise_params()?;
            let reports = example1_experiment(&cfg, &params)?;
            (common, reports)
        }
        Command::Example2 {
            common,
            delta_exponents,
        } => {
            let cfg = common.config()?;
            let params = common.noise_params()?;
            if delta_exponents.is_empty() || delta_exponents.iter().any(|&e| e == 0 || e > 300) {
                return Err(CliError::Usage("--delta-exponents must be integers in 1..=300".into()));
            }
            let mut reports = Vec::new();
            for case in common.cases() {
                reports.extend(ill_conditioning_sweep(&cfg, case, &delta_exponents, &params)?);
            }
            (common, reports)
        }
        Command::Custom { common, config } => {
            let cfg = common.config()?;
            let scenario = ScenarioConfig::load(&config).map_err(|e| match e {
                crate::model::ConfigError::Io(e) => CliError::Io(format!("{}: {e}", config.display())),
                other => CliError::Usage(other.to_string()),
            })?;
            let (model, w, v) = scenario.build().map_err(|e| CliError::Usage(e.to_string()))?;
            let scenario = Scenario {
                case: "custom".into(),
                delta: None,
                model,
                process_noise: w,
                measurement_noise: v,
            };
            let reports = run_monte_carlo(&cfg, &scenario)?;
            (common, reports)
        }
    };
    match &common.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_csv_to(&reports, std::io::BufWriter::new(file))?;
        }
        None => write_csv_to(&reports, std::io::stdout().lock())?,
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() || e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Run with --help for usage.");
            EXIT_USAGE
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_arguments_is_usage_error() {
        assert_eq!(run_cli(["mcckf"]), EXIT_USAGE);
    }

    #[test]
    fn invalid_flags_rejected() {
        assert_eq!(run_cli(["mcckf", "example1", "--trials", "0"]), EXIT_USAGE);
        assert_eq!(run_cli(["mcckf", "example1", "--kernel", "fixed"]), EXIT_USAGE);
        assert_eq!(run_cli(["mcckf", "example1", "--sigma", "2"]), EXIT_USAGE);
        assert_eq!(run_cli(["mcckf", "example1", "--filters", "bogus"]), EXIT_USAGE);
        assert_eq!(run_cli(["mcckf", "example2", "--delta-exponents", "0"]), EXIT_USAGE);
        assert_eq!(run_cli(["mcckf", "example1", "--shot-prob", "1.5"]), EXIT_USAGE);
    }

    #[test]
    fn missing_config_is_io_error() {
        let code = run_cli(["mcckf", "custom", "--config", "/nonexistent/scenario.toml", "--trials", "1"]);
        assert_eq!(code, EXIT_IO);
    }

    #[test]
    fn defaults_follow_benchmark_protocol() {
        let cli = Cli::try_parse_from(["mcckf", "example1"]).unwrap();
        let Command::Example1(c) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!((c.trials, c.steps, c.seed), (100, 300, DEFAULT_SEED));
        assert_eq!(c.filters, FilterKind::CORRENTROPY.to_vec());
    }
}
