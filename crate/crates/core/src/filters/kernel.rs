//! Gaussian correntropy kernel and the gain-scaling factor `L`.

use crate::linalg::{cholesky_upper, weighted_norm_factored, LinalgError, Matrix, UpperTriangular};

/// Weighted innovation norms below this are treated as zero in adaptive mode.
pub const ZERO_INNOVATION: f64 = 1e-12;

/// Kernel bandwidth policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KernelConfig {
    /// `σ` equals the `R⁻¹`-weighted innovation norm at every step.
    #[default]
    Adaptive,
    Fixed(f64),
}

impl KernelConfig {
    /// `Fixed(σ)` with a positive, finite `σ`.
    pub fn fixed(sigma: f64) -> Option<Self> {
        (sigma > 0.0 && sigma.is_finite()).then_some(KernelConfig::Fixed(sigma))
    }
}

/// `exp(−t² / (2σ²))`.
pub fn gaussian_kernel(t: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    (-(t * t) / (2.0 * sigma * sigma)).exp()
}

/// The correntropy ratio `L` from already factored weights.
///
/// `r_sqrt` and `p_prior_sqrt` are upper factors of `R` and of the predicted
/// covariance; the numerator kernel is evaluated at `‖e‖_{R⁻¹}` and the
/// denominator at `‖x̂⁻ − F x̂ − d‖_{P⁻¹}`.
pub fn compute_l_factored(
    innovation: &[f64],
    r_sqrt: &UpperTriangular,
    prior_residual: &[f64],
    p_prior_sqrt: &UpperTriangular,
    cfg: KernelConfig,
) -> Result<f64, LinalgError> {
    let e_norm = weighted_norm_factored(innovation, r_sqrt)?;
    let res_norm = weighted_norm_factored(prior_residual, p_prior_sqrt)?;
    let sigma = match cfg {
        KernelConfig::Adaptive => {
            if !(e_norm >= ZERO_INNOVATION) {
                // σ would be 0/0; the adaptive ratio is constant along this path.
                return Ok((-0.5_f64).exp());
            }
            e_norm
        }
        KernelConfig::Fixed(s) => s,
    };
    Ok(gaussian_kernel(e_norm, sigma) / gaussian_kernel(res_norm, sigma))
}

/// [`compute_l_factored`] taking the covariances themselves.
pub fn compute_l(
    innovation: &[f64],
    r: &Matrix,
    prior_residual: &[f64],
    p_prior: &Matrix,
    cfg: KernelConfig,
) -> Result<f64, LinalgError> {
    compute_l_factored(
        innovation,
        &cholesky_upper(r)?,
        prior_residual,
        &cholesky_upper(p_prior)?,
        cfg,
    )
}
