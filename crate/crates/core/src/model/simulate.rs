use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ModelError, NoiseSampler, NoiseSpec, StateSpaceModel};
use crate::linalg::psd_factor_upper;

/// Random stream type used for Monte Carlo trials.
pub type TrialRng = ChaCha8Rng;

/// Independent stream for one trial: the master seed keys the generator and
/// the trial index selects the ChaCha stream, so trials can run in any order.
pub fn trial_rng(master_seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// How the true initial state is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    /// `x₀ = x̄₀`.
    #[default]
    Mean,
    /// `x₀ ~ N(x̄₀, Π₀)`.
    Sampled,
}

/// Simulated truth and measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x₀ … x_N`.
    pub states: Vec<Vec<f64>>,
    /// `z₁ … z_N`; `measurements[k - 1]` is `z_k`.
    pub measurements: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.measurements.len()
    }
}

/// A model paired with prepared noise samplers.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    model: &'a StateSpaceModel,
    process: NoiseSampler,
    measurement: NoiseSampler,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a StateSpaceModel, w_spec: &NoiseSpec, v_spec: &NoiseSpec) -> Result<Self, ModelError> {
        let process = NoiseSampler::new(w_spec)?;
        let measurement = NoiseSampler::new(v_spec)?;
        if process.dim() != model.noise_dim() {
            return Err(ModelError::Dimension(format!(
                "process noise has dimension {}, G expects {}",
                process.dim(),
                model.noise_dim()
            )));
        }
        if measurement.dim() != model.meas_dim() {
            return Err(ModelError::Dimension(format!(
                "measurement noise has dimension {}, H produces {}",
                measurement.dim(),
                model.meas_dim()
            )));
        }
        Ok(Self {
            model,
            process,
            measurement,
        })
    }

    pub fn run<R: Rng + ?Sized>(
        &self,
        steps: usize,
        initial: InitialState,
        rng: &mut R,
    ) -> Result<Trajectory, ModelError> {
        if steps == 0 {
            return Err(ModelError::InvalidParameter("number of steps must be at least 1".into()));
        }
        let model = self.model;
        let mut x = match initial {
            InitialState::Mean => model.x0().to_vec(),
            InitialState::Sampled => {
                let factor = psd_factor_upper(model.p0())
                    .map_err(|source| ModelError::Covariance { which: "P0", source })?;
                let xi: Vec<f64> = (0..model.state_dim()).map(|_| rng.sample(StandardNormal)).collect();
                factor
                    .t_mul_vec(&xi)
                    .iter()
                    .zip(model.x0())
                    .map(|(a, b)| a + b)
                    .collect()
            }
        };
        let mut states = Vec::with_capacity(steps + 1);
        let mut measurements = Vec::with_capacity(steps);
        states.push(x.clone());
        for k in 1..=steps {
            let w = self.process.sample(rng);
            let gw = model.g().mul_vec(&w);
            x = model.propagate_mean(&x, k - 1);
            x.iter_mut().zip(&gw).for_each(|(xi, gi)| *xi += gi);
            let v = self.measurement.sample(rng);
            let mut z = model.h().mul_vec(&x);
            z.iter_mut().zip(&v).for_each(|(zi, vi)| *zi += vi);
            states.push(x.clone());
            measurements.push(z);
        }
        Ok(Trajectory { states, measurements })
    }
}

/// Simulates `steps` transitions from the deterministic start `x̄₀`.
pub fn simulate<R: Rng + ?Sized>(
    model: &StateSpaceModel,
    w_spec: &NoiseSpec,
    v_spec: &NoiseSpec,
    steps: usize,
    rng: &mut R,
) -> Result<Trajectory, ModelError> {
    Simulator::new(model, w_spec, v_spec)?.run(steps, InitialState::Mean, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::{build_example1, example1_noise, NoiseCase, NoiseParams};

    #[test]
    fn zero_noise_identity_dynamics_is_constant() {
        let model = StateSpaceModel::new(
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
            vec![3.0, -1.0],
            Matrix::identity(2),
        )
        .unwrap();
        let zero = NoiseSpec::zero_mean_gaussian(Matrix::zeros(2, 2));
        let traj = simulate(&model, &zero, &zero, 10, &mut trial_rng(1, 0)).unwrap();
        assert!(traj.states.iter().all(|x| x == &vec![3.0, -1.0]));
        assert!(traj.measurements.iter().all(|z| z == &vec![3.0, -1.0]));
    }

    #[test]
    fn same_seed_same_trajectory() {
        let model = build_example1();
        let (w, v) = example1_noise(NoiseCase::Case1, &NoiseParams::default());
        let a = simulate(&model, &w, &v, 50, &mut trial_rng(42, 7)).unwrap();
        let b = simulate(&model, &w, &v, 50, &mut trial_rng(42, 7)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&model, &w, &v, 50, &mut trial_rng(42, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_steps_rejected() {
        let model = build_example1();
        let (w, v) = example1_noise(NoiseCase::Case1, &NoiseParams::default());
        assert!(simulate(&model, &w, &v, 0, &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn noise_dimension_checked() {
        let model = build_example1();
        let bad = NoiseSpec::zero_mean_gaussian(Matrix::identity(3));
        let (w, _) = example1_noise(NoiseCase::Case1, &NoiseParams::default());
        assert!(Simulator::new(&model, &w, &bad).is_err());
    }

    #[test]
    fn sampled_initial_state_differs_from_mean() {
        let model = build_example1();
        let (w, v) = example1_noise(NoiseCase::Case2, &NoiseParams::default());
        let sim = Simulator::new(&model, &w, &v).unwrap();
        let t = sim.run(3, InitialState::Sampled, &mut trial_rng(5, 0)).unwrap();
        assert_ne!(t.states[0], model.x0().to_vec());
        assert!(t.states.iter().flatten().all(|x| x.is_finite()));
    }
}
