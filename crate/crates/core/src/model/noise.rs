use rand::Rng;
use rand_distr::StandardNormal;

use super::ModelError;
use crate::linalg::{psd_factor_upper, Matrix, UpperTriangular};

/// Description of a noise source.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    Gaussian {
        mean: Vec<f64>,
        cov: Matrix,
    },
    /// Gaussian background plus independent per-component impulses. Each
    /// component fires with probability `shot_prob` per draw; an impulse on
    /// component `i` is `shot_scale · √Σᵢᵢ · ξ` with `ξ` standard normal.
    GaussianPlusShot {
        mean: Vec<f64>,
        cov: Matrix,
        shot_prob: f64,
        shot_scale: f64,
    },
    /// Two-component Gaussian mixture; component 1 is picked with
    /// probability `weight1`.
    GaussianMixture {
        mean1: Vec<f64>,
        cov1: Matrix,
        mean2: Vec<f64>,
        cov2: Matrix,
        weight1: f64,
    },
}

impl NoiseSpec {
    pub fn zero_mean_gaussian(cov: Matrix) -> Self {
        NoiseSpec::Gaussian {
            mean: vec![0.0; cov.rows()],
            cov,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NoiseSpec::Gaussian { mean, .. } | NoiseSpec::GaussianPlusShot { mean, .. } => mean.len(),
            NoiseSpec::GaussianMixture { mean1, .. } => mean1.len(),
        }
    }
}

#[derive(Debug, Clone)]
struct GaussianPart {
    mean: Vec<f64>,
    factor: UpperTriangular,
}

impl GaussianPart {
    fn new(which: &'static str, mean: &[f64], cov: &Matrix) -> Result<Self, ModelError> {
        if cov.shape() != (mean.len(), mean.len()) {
            return Err(ModelError::Dimension(format!(
                "{which}: covariance is {}x{} but mean has length {}",
                cov.rows(),
                cov.cols(),
                mean.len()
            )));
        }
        let factor = psd_factor_upper(cov).map_err(|source| ModelError::Covariance { which, source })?;
        Ok(Self {
            mean: mean.to_vec(),
            factor,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let xi: Vec<f64> = (0..self.mean.len()).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = self.factor.t_mul_vec(&xi);
        out.iter_mut().zip(&self.mean).for_each(|(o, m)| *o += m);
        out
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Gaussian(GaussianPart),
    Shot {
        base: GaussianPart,
        shot_prob: f64,
        impulse_std: Vec<f64>,
    },
    Mixture {
        first: GaussianPart,
        second: GaussianPart,
        weight1: f64,
    },
}

/// A [`NoiseSpec`] with its covariance factors precomputed.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    kind: SamplerKind,
    dim: usize,
}

impl NoiseSampler {
    pub fn new(spec: &NoiseSpec) -> Result<Self, ModelError> {
        let kind = match spec {
            NoiseSpec::Gaussian { mean, cov } => SamplerKind::Gaussian(GaussianPart::new("noise", mean, cov)?),
            NoiseSpec::GaussianPlusShot {
                mean,
                cov,
                shot_prob,
                shot_scale,
            } => {
                if !(0.0..=1.0).contains(shot_prob) {
                    return Err(ModelError::InvalidParameter(format!(
                        "shot probability must lie in [0, 1], got {shot_prob}"
                    )));
                }
                if !(*shot_scale > 0.0 && shot_scale.is_finite()) {
                    return Err(ModelError::InvalidParameter(format!(
                        "shot scale must be positive, got {shot_scale}"
                    )));
                }
                let base = GaussianPart::new("shot noise", mean, cov)?;
                let impulse_std = cov.diag().iter().map(|v| shot_scale * v.max(0.0).sqrt()).collect();
                SamplerKind::Shot {
                    base,
                    shot_prob: *shot_prob,
                    impulse_std,
                }
            }
            NoiseSpec::GaussianMixture {
                mean1,
                cov1,
                mean2,
                cov2,
                weight1,
            } => {
                if !(0.0..=1.0).contains(weight1) {
                    return Err(ModelError::InvalidParameter(format!(
                        "mixture weight must lie in [0, 1], got {weight1}"
                    )));
                }
                if mean1.len() != mean2.len() {
                    return Err(ModelError::Dimension("mixture components differ in dimension".into()));
                }
                SamplerKind::Mixture {
                    first: GaussianPart::new("mixture component 1", mean1, cov1)?,
                    second: GaussianPart::new("mixture component 2", mean2, cov2)?,
                    weight1: *weight1,
                }
            }
        };
        Ok(Self { kind, dim: spec.dim() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            SamplerKind::Gaussian(g) => g.sample(rng),
            SamplerKind::Shot {
                base,
                shot_prob,
                impulse_std,
            } => {
                let mut out = base.sample(rng);
                if *shot_prob > 0.0 {
                    for (o, s) in out.iter_mut().zip(impulse_std) {
                        if rng.random::<f64>() < *shot_prob {
                            let xi: f64 = rng.sample(StandardNormal);
                            *o += s * xi;
                        }
                    }
                }
                out
            }
            SamplerKind::Mixture { first, second, weight1 } => {
                if rng.random::<f64>() < *weight1 {
                    first.sample(rng)
                } else {
                    second.sample(rng)
                }
            }
        }
    }
}

/// One draw from `spec`. Builds the factors on every call; use
/// [`NoiseSampler`] in loops.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Result<Vec<f64>, ModelError> {
    Ok(NoiseSampler::new(spec)?.sample(rng))
}
