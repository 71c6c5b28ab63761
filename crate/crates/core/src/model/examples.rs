//! The land-vehicle benchmark models.

use super::{Drift, NoiseSpec, StateSpaceModel};
use crate::linalg::Matrix;

/// Sampling interval in seconds.
pub const EXAMPLE1_DT: f64 = 3.0;
/// Heading angle in degrees.
pub const EXAMPLE1_HEADING_DEG: f64 = 60.0;

const Q_DIAG: [f64; 4] = [0.1, 0.1, 0.1, 0.1];
const R_DIAG: [f64; 2] = [0.1, 0.1];

/// Which non-Gaussian noise scenario drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseCase {
    /// Gaussian plus impulsive shot noise.
    Case1,
    /// Two-component Gaussian mixture.
    Case2,
}

impl NoiseCase {
    pub fn label(self) -> &'static str {
        match self {
            NoiseCase::Case1 => "case1",
            NoiseCase::Case2 => "case2",
        }
    }
}

/// Tunables of the non-Gaussian generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub shot_prob: f64,
    /// Impulse standard deviation as a multiple of the Gaussian one.
    pub shot_scale: f64,
    pub mixture_weight: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            shot_prob: 0.1,
            shot_scale: 10.0,
            mixture_weight: 0.5,
        }
    }
}

fn vehicle_dynamics() -> (Matrix, Vec<f64>) {
    let dt = EXAMPLE1_DT;
    let psi = EXAMPLE1_HEADING_DEG.to_radians();
    let f = Matrix::from_rows(&[
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);
    // u ≡ 1
    let drift = vec![0.0, 0.0, dt * psi.sin(), dt * psi.cos()];
    (f, drift)
}

fn vehicle_model(h: Matrix, r: Matrix) -> StateSpaceModel {
    let (f, drift) = vehicle_dynamics();
    StateSpaceModel::new(
        f,
        Matrix::identity(4),
        h,
        Matrix::from_diag(&Q_DIAG),
        r,
        vec![1.0, 1.0, 0.0, 0.0],
        Matrix::from_diag(&[4.0, 4.0, 3.0, 3.0]),
    )
    .and_then(|m| m.with_drift(Drift::Constant(drift)))
    .expect("built-in vehicle model is valid")
}

/// Constant-velocity vehicle with position measurements.
pub fn build_example1() -> StateSpaceModel {
    let h = Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]);
    vehicle_model(h, Matrix::from_diag(&R_DIAG))
}

/// Same vehicle observed through the nearly rank-one
/// `H = [1 1 1 1; 1 1 1 1+δ]` with `R = δ² I`.
///
/// Panics if `delta` is not positive and finite.
pub fn build_example2(delta: f64) -> StateSpaceModel {
    assert!(delta > 0.0 && delta.is_finite(), "delta must be positive, got {delta}");
    let h = Matrix::from_rows(&[[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0 + delta]]);
    vehicle_model(h, Matrix::from_diag(&[delta * delta, delta * delta]))
}

fn shot(cov: Matrix, p: &NoiseParams) -> NoiseSpec {
    NoiseSpec::GaussianPlusShot {
        mean: vec![0.0; cov.rows()],
        cov,
        shot_prob: p.shot_prob,
        shot_scale: p.shot_scale,
    }
}

fn mixture(mean1: Vec<f64>, mean2: Vec<f64>, cov: Matrix, p: &NoiseParams) -> NoiseSpec {
    NoiseSpec::GaussianMixture {
        mean1,
        cov1: cov.clone(),
        mean2,
        cov2: cov,
        weight1: p.mixture_weight,
    }
}

fn process_mixture(p: &NoiseParams) -> NoiseSpec {
    mixture(vec![-3.0; 4], vec![2.0; 4], Matrix::from_diag(&Q_DIAG), p)
}

/// `(process, measurement)` noise for the position-measured vehicle.
pub fn example1_noise(case: NoiseCase, p: &NoiseParams) -> (NoiseSpec, NoiseSpec) {
    let q = Matrix::from_diag(&Q_DIAG);
    let r = Matrix::from_diag(&R_DIAG);
    match case {
        NoiseCase::Case1 => (shot(q, p), shot(r, p)),
        NoiseCase::Case2 => (process_mixture(p), mixture(vec![2.0; 2], vec![-2.0; 2], r, p)),
    }
}

/// `(process, measurement)` noise for the ill-conditioned vehicle. In case 1
/// the impulses enter the process equation only.
pub fn example2_noise(case: NoiseCase, delta: f64, p: &NoiseParams) -> (NoiseSpec, NoiseSpec) {
    let q = Matrix::from_diag(&Q_DIAG);
    let r = Matrix::from_diag(&[delta * delta, delta * delta]);
    match case {
        NoiseCase::Case1 => (shot(q, p), NoiseSpec::zero_mean_gaussian(r)),
        NoiseCase::Case2 => (process_mixture(p), mixture(vec![2.0; 2], vec![-2.0; 2], r, p)),
    }
}
