//! Monte Carlo harness: replicated trajectories, RMSE, failure bookkeeping
//! and CSV reports.

mod report;

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::filters::{Filter, FilterKind, KernelConfig, StepOutput};
use crate::linalg::norm2;
use crate::model::{
    build_example1, build_example2, example1_noise, example2_noise, trial_rng, InitialState, ModelError, NoiseCase,
    NoiseParams, NoiseSpec, Simulator, StateSpaceModel, Trajectory,
};

pub use report::{write_csv, write_csv_to, CSV_DEFAULT_STATE_COLUMNS};

#[derive(Debug)]
pub enum BenchError {
    /// Every trial failed, or there was nothing to average.
    EmptyInput,
    Dimension(String),
    InvalidConfig(String),
    Model(ModelError),
    Io(std::io::Error),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::EmptyInput => write!(f, "no finite trials to average"),
            BenchError::Dimension(msg) => write!(f, "dimension error: {msg}"),
            BenchError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            BenchError::Model(e) => write!(f, "{e}"),
            BenchError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<ModelError> for BenchError {
    fn from(e: ModelError) -> Self {
        BenchError::Model(e)
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e)
    }
}

/// A model with its noise sources and the labels it is reported under.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub case: String,
    pub delta: Option<f64>,
    pub model: StateSpaceModel,
    pub process_noise: NoiseSpec,
    pub measurement_noise: NoiseSpec,
}

impl Scenario {
    pub fn example1(case: NoiseCase, params: &NoiseParams) -> Self {
        let (w, v) = example1_noise(case, params);
        Self {
            case: case.label().to_string(),
            delta: None,
            model: build_example1(),
            process_noise: w,
            measurement_noise: v,
        }
    }

    pub fn example2(case: NoiseCase, delta: f64, params: &NoiseParams) -> Self {
        let (w, v) = example2_noise(case, delta, params);
        Self {
            case: case.label().to_string(),
            delta: Some(delta),
            model: build_example2(delta),
            process_noise: w,
            measurement_noise: v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub steps: usize,
    pub master_seed: u64,
    pub filters: Vec<FilterKind>,
    pub kernel: KernelConfig,
    pub initial_state: InitialState,
    pub record_timing: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            steps: 300,
            master_seed: DEFAULT_SEED,
            filters: FilterKind::CORRENTROPY.to_vec(),
            kernel: KernelConfig::Adaptive,
            initial_state: InitialState::Mean,
            record_timing: false,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_180_101;

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 || self.steps == 0 {
            return Err(BenchError::InvalidConfig("trials and steps must be at least 1".into()));
        }
        if self.filters.is_empty() {
            return Err(BenchError::InvalidConfig("no filters selected".into()));
        }
        Ok(())
    }
}

/// Per-(scenario, filter) summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub filter: FilterKind,
    pub case: String,
    pub delta: Option<f64>,
    /// Per-component RMSE over the non-failed trials; NaN when all failed.
    pub rmse: Vec<f64>,
    pub rmse_norm: f64,
    pub failures: usize,
    pub trials: usize,
    pub mean_step_seconds: Option<f64>,
    /// Condition estimate of the `R_e^L` factor at the first step of trial 0.
    pub first_step_condition: f64,
}

impl RmseReport {
    /// A cell counts as failed when any of its trials failed.
    pub fn is_failed(&self) -> bool {
        self.failures > 0
    }
}

/// Component-wise root of the mean over trials and steps of the squared
/// estimation error. `truth[t][k]` and `estimates[t][k]` are compared
/// directly, so callers align the sequences.
pub fn rmse(truth: &[Vec<Vec<f64>>], estimates: &[Vec<Vec<f64>>]) -> Result<Vec<f64>, BenchError> {
    if truth.len() != estimates.len() {
        return Err(BenchError::Dimension(format!(
            "{} truth trials, {} estimate trials",
            truth.len(),
            estimates.len()
        )));
    }
    let mut acc: Option<ErrorSum> = None;
    for (t, e) in truth.iter().zip(estimates) {
        if t.len() != e.len() {
            return Err(BenchError::Dimension("trial lengths differ".into()));
        }
        for (x, xh) in t.iter().zip(e) {
            if x.len() != xh.len() {
                return Err(BenchError::Dimension("state lengths differ".into()));
            }
            acc.get_or_insert_with(|| ErrorSum::new(x.len())).add(x, xh)?;
        }
    }
    acc.ok_or(BenchError::EmptyInput)?.rmse()
}

#[derive(Debug, Clone, PartialEq)]
struct ErrorSum {
    sq: Vec<f64>,
    count: usize,
}

impl ErrorSum {
    fn new(n: usize) -> Self {
        Self { sq: vec![0.0; n], count: 0 }
    }

    fn add(&mut self, x: &[f64], xh: &[f64]) -> Result<(), BenchError> {
        if x.len() != self.sq.len() {
            return Err(BenchError::Dimension("state lengths differ".into()));
        }
        for ((s, a), b) in self.sq.iter_mut().zip(x).zip(xh) {
            *s += (a - b) * (a - b);
        }
        self.count += 1;
        Ok(())
    }

    fn merge(&mut self, other: &ErrorSum) {
        self.sq.iter_mut().zip(&other.sq).for_each(|(a, b)| *a += b);
        self.count += other.count;
    }

    fn rmse(&self) -> Result<Vec<f64>, BenchError> {
        if self.count == 0 {
            return Err(BenchError::EmptyInput);
        }
        let c = self.count as f64;
        Ok(self.sq.iter().map(|s| (s / c).sqrt()).collect())
    }
}

/// Runs one filter over a measurement sequence, stopping at the first
/// failed step (which is included in the output).
pub fn run_filter(filter: Filter, model: &StateSpaceModel, measurements: &[Vec<f64>]) -> Vec<StepOutput> {
    let mut outputs = Vec::with_capacity(measurements.len());
    let mut state = match filter.init(model) {
        Ok(s) => s,
        Err(_) => crate::filters::FilterState::Failed { step: 0 },
    };
    for z in measurements {
        let (next, out) = filter.step(&state, model, z);
        let failed = out.failed;
        outputs.push(out);
        if failed {
            break;
        }
        state = next;
    }
    outputs
}

struct FilterTrial {
    errors: ErrorSum,
    failed: bool,
    elapsed: Duration,
    first_condition: f64,
}

fn run_trial(
    filter: Filter,
    model: &StateSpaceModel,
    traj: &Trajectory,
    timing: bool,
) -> FilterTrial {
    let start = timing.then(Instant::now);
    let outputs = run_filter(filter, model, &traj.measurements);
    let elapsed = start.map(|s| s.elapsed()).unwrap_or_default();
    let mut errors = ErrorSum::new(model.state_dim());
    let failed = outputs.len() < traj.steps() || outputs.iter().any(|o| o.failed);
    if !failed {
        for (out, x) in outputs.iter().zip(&traj.states[1..]) {
            errors.add(x, &out.x_post).expect("filter output matches model dimension");
        }
    }
    FilterTrial {
        errors,
        failed,
        elapsed,
        first_condition: outputs.first().map_or(f64::INFINITY, |o| o.re_condition),
    }
}

/// Simulates every trial once and runs each selected filter on that same
/// trajectory. Trials run in parallel and are reduced in trial order.
pub fn run_monte_carlo(cfg: &MonteCarloConfig, scenario: &Scenario) -> Result<Vec<RmseReport>, BenchError> {
    cfg.validate()?;
    let model = &scenario.model;
    let sim = Simulator::new(model, &scenario.process_noise, &scenario.measurement_noise)?;
    let filters: Vec<Filter> = cfg.filters.iter().map(|&k| Filter::new(k, cfg.kernel)).collect();
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.master_seed, t as u64);
            let traj = sim.run(cfg.steps, cfg.initial_state, &mut rng)?;
            Ok(filters
                .iter()
                .map(|&f| run_trial(f, model, &traj, cfg.record_timing))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    let n = model.state_dim();
    let reports = filters
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut sum = ErrorSum::new(n);
            let mut failures = 0;
            let mut elapsed = Duration::ZERO;
            for trial in &per_trial {
                let r = &trial[i];
                elapsed += r.elapsed;
                if r.failed {
                    failures += 1;
                } else {
                    sum.merge(&r.errors);
                }
            }
            let rmse = sum.rmse().unwrap_or_else(|_| vec![f64::NAN; n]);
            RmseReport {
                filter: f.kind,
                case: scenario.case.clone(),
                delta: scenario.delta,
                rmse_norm: norm2(&rmse),
                rmse,
                failures,
                trials: cfg.trials,
                mean_step_seconds: cfg
                    .record_timing
                    .then(|| elapsed.as_secs_f64() / (cfg.trials * cfg.steps) as f64),
                first_step_condition: per_trial[0][i].first_condition,
            }
        })
        .collect();
    Ok(reports)
}

/// Both noise cases of the vehicle benchmark.
pub fn example1_experiment(cfg: &MonteCarloConfig, params: &NoiseParams) -> Result<Vec<RmseReport>, BenchError> {
    let mut out = Vec::new();
    for case in [NoiseCase::Case1, NoiseCase::Case2] {
        out.extend(run_monte_carlo(cfg, &Scenario::example1(case, params))?);
    }
    Ok(out)
}

/// Runs the ill-conditioned model at `δ = 10^{-e}` for each exponent.
pub fn ill_conditioning_sweep(
    cfg: &MonteCarloConfig,
    case: NoiseCase,
    exponents: &[u32],
    params: &NoiseParams,
) -> Result<Vec<RmseReport>, BenchError> {
    if exponents.is_empty() {
        return Err(BenchError::InvalidConfig("empty δ exponent list".into()));
    }
    let mut out = Vec::new();
    for &e in exponents {
        let delta = 10f64.powi(-(e as i32));
        out.extend(run_monte_carlo(cfg, &Scenario::example2(case, delta, params))?);
    }
    Ok(out)
}
