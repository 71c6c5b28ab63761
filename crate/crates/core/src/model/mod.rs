//! Linear state-space models, noise generators and trajectory simulation.
//!
//! ```text
//! x_k = F x_{k-1} + d_{k-1} + G w_{k-1}
//! z_k = H x_k + v_k
//! ```

mod config;
mod examples;
mod noise;
mod simulate;

use std::fmt;

use crate::linalg::{cholesky_upper, psd_factor_upper, LinalgError, Matrix, UpperTriangular};

pub use config::{ConfigError, MatrixRows, ModelSection, NoiseSection, ScenarioConfig};
pub use examples::{
    build_example1, build_example2, example1_noise, example2_noise, NoiseCase, NoiseParams,
    EXAMPLE1_DT, EXAMPLE1_HEADING_DEG,
};
pub use noise::{sample_noise, NoiseSampler, NoiseSpec};
pub use simulate::{simulate, trial_rng, InitialState, Simulator, Trajectory, TrialRng};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Dimension(String),
    /// A covariance failed its definiteness requirement.
    Covariance {
        which: &'static str,
        source: LinalgError,
    },
    InvalidParameter(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Dimension(msg) => write!(f, "dimension error: {msg}"),
            ModelError::Covariance { which, source } => write!(f, "covariance {which}: {source}"),
            ModelError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl std::error::Error for ModelError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ModelError::Covariance { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Deterministic input added during each time update.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Drift {
    #[default]
    None,
    /// Same vector at every step.
    Constant(Vec<f64>),
    /// `d_0, d_1, …`; steps past the end receive no drift.
    Sequence(Vec<Vec<f64>>),
}

/// Discrete linear time-invariant system with its noise moments.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    f: Matrix,
    g: Matrix,
    h: Matrix,
    q: Matrix,
    r: Matrix,
    x0: Vec<f64>,
    p0: Matrix,
    drift: Drift,
    q_sqrt: UpperTriangular,
    r_sqrt: UpperTriangular,
    gqg: Matrix,
}

fn expect_shape(name: &str, m: &Matrix, rows: usize, cols: usize) -> Result<(), ModelError> {
    if m.shape() != (rows, cols) {
        return Err(ModelError::Dimension(format!(
            "{name} must be {rows}x{cols}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(ModelError::InvalidParameter(format!("{name} has non-finite entries")));
    }
    Ok(())
}

impl StateSpaceModel {
    /// Validates dimensions and definiteness: `Q`, `Π₀` must be PSD and `R`
    /// strictly positive definite.
    pub fn new(
        f: Matrix,
        g: Matrix,
        h: Matrix,
        q: Matrix,
        r: Matrix,
        x0: Vec<f64>,
        p0: Matrix,
    ) -> Result<Self, ModelError> {
        let n = f.rows();
        expect_shape("F", &f, n, n)?;
        let nq = g.cols();
        expect_shape("G", &g, n, nq)?;
        let m = h.rows();
        expect_shape("H", &h, m, n)?;
        expect_shape("Q", &q, nq, nq)?;
        expect_shape("R", &r, m, m)?;
        expect_shape("P0", &p0, n, n)?;
        if x0.len() != n {
            return Err(ModelError::Dimension(format!(
                "x0 must have length {n}, got {}",
                x0.len()
            )));
        }
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidParameter("x0 has non-finite entries".into()));
        }
        let q_sqrt = psd_factor_upper(&q).map_err(|source| ModelError::Covariance { which: "Q", source })?;
        let r_sqrt = cholesky_upper(&r).map_err(|source| ModelError::Covariance { which: "R", source })?;
        psd_factor_upper(&p0).map_err(|source| ModelError::Covariance { which: "P0", source })?;
        let gqg = g.matmul(&q).matmul_t(&g).symmetrize();
        Ok(Self {
            f,
            g,
            h,
            q,
            r,
            x0,
            p0,
            drift: Drift::None,
            q_sqrt,
            r_sqrt,
            gqg,
        })
    }

    pub fn with_drift(mut self, drift: Drift) -> Result<Self, ModelError> {
        let n = self.state_dim();
        let bad = match &drift {
            Drift::None => false,
            Drift::Constant(d) => d.len() != n,
            Drift::Sequence(ds) => ds.iter().any(|d| d.len() != n),
        };
        if bad {
            return Err(ModelError::Dimension(format!("drift vectors must have length {n}")));
        }
        self.drift = drift;
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.f.rows()
    }

    pub fn meas_dim(&self) -> usize {
        self.h.rows()
    }

    pub fn noise_dim(&self) -> usize {
        self.g.cols()
    }

    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn p0(&self) -> &Matrix {
        &self.p0
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    /// `Q^{1/2}` (upper, possibly with zero rows when `Q` is singular).
    pub fn q_sqrt(&self) -> &UpperTriangular {
        &self.q_sqrt
    }

    /// `R^{1/2}`.
    pub fn r_sqrt(&self) -> &UpperTriangular {
        &self.r_sqrt
    }

    /// `G Q Gᵀ`.
    pub fn gqg(&self) -> &Matrix {
        &self.gqg
    }

    /// Drift applied in the transition from step `k` to `k + 1`.
    pub fn drift_at(&self, k: usize) -> Option<&[f64]> {
        match &self.drift {
            Drift::None => None,
            Drift::Constant(d) => Some(d),
            Drift::Sequence(ds) => ds.get(k).map(Vec::as_slice),
        }
    }

    /// `F x + d_k`.
    pub fn propagate_mean(&self, x: &[f64], k: usize) -> Vec<f64> {
        let mut out = self.f.mul_vec(x);
        if let Some(d) = self.drift_at(k) {
            out.iter_mut().zip(d).for_each(|(o, di)| *o += di);
        }
        out
    }
}
