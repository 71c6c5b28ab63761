//! The filter family behind one interface.
//!
//! | kind                     | covariance storage | measurement update                                |
//! |--------------------------|--------------------|---------------------------------------------------|
//! | [`FilterKind::Kf`]       | full `P`           | classical gain, `(I − K H) P`                     |
//! | [`FilterKind::MccKf`]    | full `P`           | information-form gain, Joseph covariance          |
//! | [`FilterKind::MccKfLemma`] | full `P`         | information-form gain, `L`-scaled Joseph          |
//! | [`FilterKind::ImccKf`]   | full `P`           | `P L Hᵀ (R_e^L)⁻¹`, `(I − K H) P`                 |
//! | [`FilterKind::SrImccKf`] | `P^{1/2}`          | array triangularization, triangular solve         |
//! | [`FilterKind::EsrImccKf`]| `P^{1/2}`, `P^{-T/2}x̂` | extended array, no solve with `R_e^L`        |
//!
//! A step consumes a state and returns a new one. Any factorization failure
//! or non-finite value moves the filter into a terminal failed state.

mod conventional;
pub mod forms;
mod kernel;
mod square_root;

use std::fmt;
use std::str::FromStr;

use crate::linalg::{LinalgError, Matrix, UpperTriangular};
use crate::model::StateSpaceModel;

pub use conventional::{imcc_kf_step, init_conventional, kf_step, mcc_kf_step_lemma, mcc_kf_step_original};
pub use kernel::{compute_l, compute_l_factored, gaussian_kernel, KernelConfig, ZERO_INNOVATION};
pub use square_root::{esr_imcc_step, init_esr, init_sr, sr_imcc_step};

#[derive(Debug, Clone, PartialEq)]
pub enum FilterError {
    Linalg(LinalgError),
    NonFinite,
    Dimension(String),
    /// The state handed to a step belongs to a different filter family.
    WrongState,
}

impl fmt::Display for FilterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterError::Linalg(e) => write!(f, "{e}"),
            FilterError::NonFinite => write!(f, "non-finite value in filter output"),
            FilterError::Dimension(msg) => write!(f, "dimension error: {msg}"),
            FilterError::WrongState => write!(f, "state does not match filter kind"),
        }
    }
}

impl std::error::Error for FilterError {}

impl From<LinalgError> for FilterError {
    fn from(e: LinalgError) -> Self {
        FilterError::Linalg(e)
    }
}

/// Posterior mean and full covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionalState {
    pub x: Vec<f64>,
    pub p: Matrix,
    pub step: usize,
}

/// What the factored filters carry alongside `P^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum FactoredMean {
    /// `x̂` itself.
    Plain(Vec<f64>),
    /// `P^{-T/2} x̂`.
    Normalized(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactoredState {
    pub mean: FactoredMean,
    /// Upper factor `S` with `P = Sᵀ S`.
    pub sqrt_cov: UpperTriangular,
    pub step: usize,
}

impl FactoredState {
    pub fn estimate(&self) -> Vec<f64> {
        match &self.mean {
            FactoredMean::Plain(x) => x.clone(),
            FactoredMean::Normalized(xi) => self.sqrt_cov.t_mul_vec(xi),
        }
    }

    pub fn covariance(&self) -> Matrix {
        self.sqrt_cov.gram()
    }
}

/// Explicit work done by one step; used to check the inversion budget of
/// each variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    /// Full inversions of `n×n` matrices.
    pub state_inversions: u32,
    /// Inversions (explicit or through a Cholesky solve) of `m×m` matrices.
    pub measurement_inversions: u32,
    pub triangularizations: u32,
    pub triangular_solves: u32,
}

/// Everything a step reports.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub step: usize,
    pub x_prior: Vec<f64>,
    pub x_post: Vec<f64>,
    /// Posterior covariance (reconstructed as `Sᵀ S` for factored filters).
    pub p_post: Matrix,
    /// Gain scaling `L`.
    pub gain_scale: f64,
    pub innovation: Vec<f64>,
    /// [`crate::linalg::condition_estimate`] of the `R_e^L` factor, `+∞`
    /// when it could not be formed.
    pub re_condition: f64,
    pub failed: bool,
    pub ops: OpCount,
}

impl StepOutput {
    fn failure(step: usize, n: usize, m: usize) -> Self {
        Self {
            step,
            x_prior: vec![f64::NAN; n],
            x_post: vec![f64::NAN; n],
            p_post: Matrix::new(n, n, vec![f64::NAN; n * n]).expect("nonzero state dimension"),
            gain_scale: f64::NAN,
            innovation: vec![f64::NAN; m],
            re_condition: f64::INFINITY,
            failed: true,
            ops: OpCount::default(),
        }
    }

    pub(crate) fn check_finite(self) -> Result<Self, FilterError> {
        let finite = self.x_prior.iter().chain(&self.x_post).all(|v| v.is_finite())
            && self.p_post.is_finite()
            && self.gain_scale.is_finite();
        if finite {
            Ok(self)
        } else {
            Err(FilterError::NonFinite)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterKind {
    /// Classical Kalman filter.
    Kf,
    /// Original MCC-KF with the unscaled Joseph covariance.
    MccKf,
    /// MCC-KF with the `L`-scaled Joseph covariance.
    MccKfLemma,
    /// Improved conventional MCC-KF.
    ImccKf,
    /// Square-root array IMCC-KF.
    SrImccKf,
    /// Extended square-root array IMCC-KF.
    EsrImccKf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 6] = [
        FilterKind::Kf,
        FilterKind::MccKf,
        FilterKind::MccKfLemma,
        FilterKind::ImccKf,
        FilterKind::SrImccKf,
        FilterKind::EsrImccKf,
    ];

    /// The five correntropy variants compared in the benchmark tables.
    pub const CORRENTROPY: [FilterKind; 5] = [
        FilterKind::MccKf,
        FilterKind::MccKfLemma,
        FilterKind::ImccKf,
        FilterKind::SrImccKf,
        FilterKind::EsrImccKf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Kf => "kf",
            FilterKind::MccKf => "mcc-kf",
            FilterKind::MccKfLemma => "mcc-kf-lemma",
            FilterKind::ImccKf => "imcc-kf",
            FilterKind::SrImccKf => "sr-imcc-kf",
            FilterKind::EsrImccKf => "esr-imcc-kf",
        }
    }

    pub fn is_square_root(self) -> bool {
        matches!(self, FilterKind::SrImccKf | FilterKind::EsrImccKf)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FilterKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown filter '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterState {
    Conventional(ConventionalState),
    Factored(FactoredState),
    /// Terminal state after a numerical breakdown at `step`.
    Failed { step: usize },
}

impl FilterState {
    pub fn step(&self) -> usize {
        match self {
            FilterState::Conventional(s) => s.step,
            FilterState::Factored(s) => s.step,
            FilterState::Failed { step } => *step,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, FilterState::Failed { .. })
    }

    pub fn estimate(&self) -> Option<Vec<f64>> {
        match self {
            FilterState::Conventional(s) => Some(s.x.clone()),
            FilterState::Factored(s) => Some(s.estimate()),
            FilterState::Failed { .. } => None,
        }
    }

    pub fn covariance(&self) -> Option<Matrix> {
        match self {
            FilterState::Conventional(s) => Some(s.p.clone()),
            FilterState::Factored(s) => Some(s.covariance()),
            FilterState::Failed { .. } => None,
        }
    }
}

/// A filter variant with its kernel policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filter {
    pub kind: FilterKind,
    pub kernel: KernelConfig,
}

impl Filter {
    pub fn new(kind: FilterKind, kernel: KernelConfig) -> Self {
        Self { kind, kernel }
    }

    pub fn init(&self, model: &StateSpaceModel) -> Result<FilterState, FilterError> {
        Ok(match self.kind {
            FilterKind::SrImccKf => FilterState::Factored(init_sr(model)?),
            FilterKind::EsrImccKf => FilterState::Factored(init_esr(model)?),
            _ => FilterState::Conventional(init_conventional(model)),
        })
    }

    /// Advances one step, never panicking on numerical trouble: failures are
    /// reported through [`StepOutput::failed`] and a terminal state.
    pub fn step(&self, state: &FilterState, model: &StateSpaceModel, z: &[f64]) -> (FilterState, StepOutput) {
        let k = state.step() + 1;
        let result = match state {
            FilterState::Failed { step } => {
                return (
                    FilterState::Failed { step: *step },
                    StepOutput::failure(k, model.state_dim(), model.meas_dim()),
                );
            }
            FilterState::Conventional(s) => match self.kind {
                FilterKind::Kf => kf_step(s, model, z),
                FilterKind::MccKf => mcc_kf_step_original(s, model, z, self.kernel),
                FilterKind::MccKfLemma => mcc_kf_step_lemma(s, model, z, self.kernel),
                FilterKind::ImccKf => imcc_kf_step(s, model, z, self.kernel),
                _ => Err(FilterError::WrongState),
            }
            .map(|(s, o)| (FilterState::Conventional(s), o)),
            FilterState::Factored(s) => match self.kind {
                FilterKind::SrImccKf => sr_imcc_step(s, model, z, self.kernel),
                FilterKind::EsrImccKf => esr_imcc_step(s, model, z, self.kernel),
                _ => Err(FilterError::WrongState),
            }
            .map(|(s, o)| (FilterState::Factored(s), o)),
        };
        match result {
            Ok(pair) => pair,
            Err(_) => (
                FilterState::Failed { step: k },
                StepOutput::failure(k, model.state_dim(), model.meas_dim()),
            ),
        }
    }
}

pub(crate) fn check_measurement(model: &StateSpaceModel, z: &[f64]) -> Result<(), FilterError> {
    if z.len() != model.meas_dim() {
        return Err(FilterError::Dimension(format!(
            "measurement has length {}, expected {}",
            z.len(),
            model.meas_dim()
        )));
    }
    Ok(())
}
