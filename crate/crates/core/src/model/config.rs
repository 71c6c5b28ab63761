//! Plain-text scenario files (TOML).
//!
//! ```toml
//! [model]
//! f  = [[1.0, 0.0], [0.0, 1.0]]
//! g  = [[1.0, 0.0], [0.0, 1.0]]   # optional, identity by default
//! h  = [[1.0, 0.0]]
//! q  = [[0.1, 0.0], [0.0, 0.1]]
//! r  = [[0.1]]
//! x0 = [0.0, 0.0]
//! p0 = [[1.0, 0.0], [0.0, 1.0]]
//! drift = [0.0, 1.0]              # optional constant input per step
//!
//! [process_noise]
//! kind = "shot"                   # gaussian | shot | mixture
//! shot_prob = 0.1
//! shot_scale = 10.0
//!
//! [measurement_noise]
//! kind = "mixture"
//! mean1 = [2.0]
//! mean2 = [-2.0]
//! weight1 = 0.5
//! ```
//!
//! Noise means default to zero and covariances to the model's `q` (process)
//! or `r` (measurement).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Drift, ModelError, NoiseSpec, StateSpaceModel};
use crate::linalg::Matrix;

pub type MatrixRows = Vec<Vec<f64>>;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    Model(ModelError),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(msg) => write!(f, "malformed config: {msg}"),
            ConfigError::Model(e) => write!(f, "invalid model in config: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        ConfigError::Model(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub f: MatrixRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<MatrixRows>,
    pub h: MatrixRows,
    pub q: MatrixRows,
    pub r: MatrixRows,
    pub x0: Vec<f64>,
    pub p0: MatrixRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
}

fn default_shot_prob() -> f64 {
    0.1
}

fn default_shot_scale() -> f64 {
    10.0
}

fn default_weight() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSection {
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cov: Option<MatrixRows>,
    },
    Shot {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cov: Option<MatrixRows>,
        #[serde(default = "default_shot_prob")]
        shot_prob: f64,
        #[serde(default = "default_shot_scale")]
        shot_scale: f64,
    },
    Mixture {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean1: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cov1: Option<MatrixRows>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean2: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cov2: Option<MatrixRows>,
        #[serde(default = "default_weight")]
        weight1: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub process_noise: NoiseSection,
    pub measurement_noise: NoiseSection,
}

fn to_matrix(name: &str, rows: &MatrixRows) -> Result<Matrix, ConfigError> {
    Matrix::try_from_rows(rows).map_err(|e| ConfigError::Parse(format!("{name}: {e}")))
}

fn to_rows(m: &Matrix) -> MatrixRows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

impl NoiseSection {
    fn to_spec(&self, default_cov: &Matrix) -> Result<NoiseSpec, ConfigError> {
        let dim = default_cov.rows();
        let cov_or_default = |name: &str, c: &Option<MatrixRows>| match c {
            Some(rows) => to_matrix(name, rows),
            None => Ok(default_cov.clone()),
        };
        let mean_or_zero = |m: &Option<Vec<f64>>| m.clone().unwrap_or_else(|| vec![0.0; dim]);
        Ok(match self {
            NoiseSection::Gaussian { mean, cov } => NoiseSpec::Gaussian {
                mean: mean_or_zero(mean),
                cov: cov_or_default("cov", cov)?,
            },
            NoiseSection::Shot {
                mean,
                cov,
                shot_prob,
                shot_scale,
            } => NoiseSpec::GaussianPlusShot {
                mean: mean_or_zero(mean),
                cov: cov_or_default("cov", cov)?,
                shot_prob: *shot_prob,
                shot_scale: *shot_scale,
            },
            NoiseSection::Mixture {
                mean1,
                cov1,
                mean2,
                cov2,
                weight1,
            } => NoiseSpec::GaussianMixture {
                mean1: mean_or_zero(mean1),
                cov1: cov_or_default("cov1", cov1)?,
                mean2: mean_or_zero(mean2),
                cov2: cov_or_default("cov2", cov2)?,
                weight1: *weight1,
            },
        })
    }

    fn from_spec(spec: &NoiseSpec) -> Self {
        match spec {
            NoiseSpec::Gaussian { mean, cov } => NoiseSection::Gaussian {
                mean: Some(mean.clone()),
                cov: Some(to_rows(cov)),
            },
            NoiseSpec::GaussianPlusShot {
                mean,
                cov,
                shot_prob,
                shot_scale,
            } => NoiseSection::Shot {
                mean: Some(mean.clone()),
                cov: Some(to_rows(cov)),
                shot_prob: *shot_prob,
                shot_scale: *shot_scale,
            },
            NoiseSpec::GaussianMixture {
                mean1,
                cov1,
                mean2,
                cov2,
                weight1,
            } => NoiseSection::Mixture {
                mean1: Some(mean1.clone()),
                cov1: Some(to_rows(cov1)),
                mean2: Some(mean2.clone()),
                cov2: Some(to_rows(cov2)),
                weight1: *weight1,
            },
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// Captures a model and its noise sources. Sequence drifts cannot be
    /// expressed in the file format and are rejected.
    pub fn from_scenario(model: &StateSpaceModel, w: &NoiseSpec, v: &NoiseSpec) -> Result<Self, ConfigError> {
        let drift = match model.drift() {
            Drift::None => None,
            Drift::Constant(d) => Some(d.clone()),
            Drift::Sequence(_) => {
                return Err(ConfigError::Parse("sequence drifts are not representable".into()));
            }
        };
        Ok(Self {
            model: ModelSection {
                f: to_rows(model.f()),
                g: Some(to_rows(model.g())),
                h: to_rows(model.h()),
                q: to_rows(model.q()),
                r: to_rows(model.r()),
                x0: model.x0().to_vec(),
                p0: to_rows(model.p0()),
                drift,
            },
            process_noise: NoiseSection::from_spec(w),
            measurement_noise: NoiseSection::from_spec(v),
        })
    }

    /// Builds the validated model and `(process, measurement)` noise specs.
    pub fn build(&self) -> Result<(StateSpaceModel, NoiseSpec, NoiseSpec), ConfigError> {
        let s = &self.model;
        let f = to_matrix("f", &s.f)?;
        let g = match &s.g {
            Some(rows) => to_matrix("g", rows)?,
            None => Matrix::identity(f.rows()),
        };
        let mut model = StateSpaceModel::new(
            f,
            g,
            to_matrix("h", &s.h)?,
            to_matrix("q", &s.q)?,
            to_matrix("r", &s.r)?,
            s.x0.clone(),
            to_matrix("p0", &s.p0)?,
        )?;
        if let Some(d) = &s.drift {
            model = model.with_drift(Drift::Constant(d.clone()))?;
        }
        let w = self.process_noise.to_spec(model.q())?;
        let v = self.measurement_noise.to_spec(model.r())?;
        Ok((model, w, v))
    }
}
