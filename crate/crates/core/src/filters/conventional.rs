//! Filters that propagate the full covariance matrix.

use super::forms::{
    covariance_joseph, covariance_scaled_joseph, covariance_short_form, gain_information_form, gain_innovation_form,
    scaled_innovation_cov,
};
use super::kernel::{compute_l_factored, KernelConfig};
use super::{check_measurement, ConventionalState, FilterError, OpCount, StepOutput};
use crate::linalg::{cholesky_upper, condition_estimate, Matrix, UpperTriangular};
use crate::model::StateSpaceModel;

pub fn init_conventional(model: &StateSpaceModel) -> ConventionalState {
    ConventionalState {
        x: model.x0().to_vec(),
        p: model.p0().clone(),
        step: 0,
    }
}

struct Predicted {
    x: Vec<f64>,
    p: Matrix,
    p_sqrt: UpperTriangular,
    residual: Vec<f64>,
    innovation: Vec<f64>,
}

fn predict(state: &ConventionalState, model: &StateSpaceModel, z: &[f64]) -> Result<Predicted, FilterError> {
    check_measurement(model, z)?;
    if state.x.len() != model.state_dim() || state.p.shape() != (model.state_dim(), model.state_dim()) {
        return Err(FilterError::Dimension("state does not match model".into()));
    }
    let f = model.f();
    let x = model.propagate_mean(&state.x, state.step);
    let p = (&f.matmul(&state.p).matmul_t(f) + model.gqg()).symmetrize();
    if !p.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(FilterError::NonFinite);
    }
    let p_sqrt = cholesky_upper(&p)?;
    let mean = model.propagate_mean(&state.x, state.step);
    let residual = x.iter().zip(&mean).map(|(a, b)| a - b).collect();
    let hx = model.h().mul_vec(&x);
    let innovation = z.iter().zip(&hx).map(|(a, b)| a - b).collect();
    Ok(Predicted {
        x,
        p,
        p_sqrt,
        residual,
        innovation,
    })
}

fn gain_scale(pred: &Predicted, model: &StateSpaceModel, kernel: KernelConfig) -> Result<f64, FilterError> {
    Ok(compute_l_factored(
        &pred.innovation,
        model.r_sqrt(),
        &pred.residual,
        &pred.p_sqrt,
        kernel,
    )?)
}

fn finish(
    state: &ConventionalState,
    pred: Predicted,
    k: &Matrix,
    p_post: Matrix,
    l: f64,
    re_condition: f64,
    ops: OpCount,
) -> Result<(ConventionalState, StepOutput), FilterError> {
    let correction = k.mul_vec(&pred.innovation);
    let x_post: Vec<f64> = pred.x.iter().zip(&correction).map(|(a, b)| a + b).collect();
    let p_post = p_post.symmetrize();
    let step = state.step + 1;
    let out = StepOutput {
        step,
        x_prior: pred.x,
        x_post: x_post.clone(),
        p_post: p_post.clone(),
        gain_scale: l,
        innovation: pred.innovation,
        re_condition,
        failed: false,
        ops,
    }
    .check_finite()?;
    Ok((
        ConventionalState {
            x: x_post,
            p: p_post,
            step,
        },
        out,
    ))
}

fn diagnostic_condition(p: &Matrix, model: &StateSpaceModel, l: f64) -> f64 {
    cholesky_upper(&scaled_innovation_cov(p, model.h(), model.r(), l))
        .map(|u| condition_estimate(&u))
        .unwrap_or(f64::INFINITY)
}

/// Classical Kalman filter step.
pub fn kf_step(
    state: &ConventionalState,
    model: &StateSpaceModel,
    z: &[f64],
) -> Result<(ConventionalState, StepOutput), FilterError> {
    let pred = predict(state, model, z)?;
    let (k, re_sqrt) = gain_innovation_form(&pred.p, model.h(), model.r(), 1.0)?;
    let p_post = covariance_short_form(&pred.p, &k, model.h());
    let ops = OpCount {
        measurement_inversions: 1,
        ..OpCount::default()
    };
    finish(state, pred, &k, p_post, 1.0, condition_estimate(&re_sqrt), ops)
}

fn mcc_kf_step(
    state: &ConventionalState,
    model: &StateSpaceModel,
    z: &[f64],
    kernel: KernelConfig,
    scaled: bool,
) -> Result<(ConventionalState, StepOutput), FilterError> {
    let pred = predict(state, model, z)?;
    let l = gain_scale(&pred, model, kernel)?;
    let (h, r) = (model.h(), model.r());
    let k = gain_information_form(&pred.p, h, r, l)?;
    let p_post = if scaled {
        covariance_scaled_joseph(&pred.p, &k, h, r, l)
    } else {
        covariance_joseph(&pred.p, &k, h, r)
    };
    let ops = OpCount {
        state_inversions: 2,
        measurement_inversions: 1,
        triangular_solves: 2,
        ..OpCount::default()
    };
    let cond = diagnostic_condition(&pred.p, model, l);
    finish(state, pred, &k, p_post, l, cond, ops)
}

/// MCC-KF with the information-form gain and the unscaled Joseph covariance.
pub fn mcc_kf_step_original(
    state: &ConventionalState,
    model: &StateSpaceModel,
    z: &[f64],
    kernel: KernelConfig,
) -> Result<(ConventionalState, StepOutput), FilterError> {
    mcc_kf_step(state, model, z, kernel, false)
}

/// MCC-KF with the covariance `(I − K H) P (I − L K H)ᵀ + K R Kᵀ`.
pub fn mcc_kf_step_lemma(
    state: &ConventionalState,
    model: &StateSpaceModel,
    z: &[f64],
    kernel: KernelConfig,
) -> Result<(ConventionalState, StepOutput), FilterError> {
    mcc_kf_step(state, model, z, kernel, true)
}

/// IMCC-KF: `K = P L Hᵀ (L H P Hᵀ + R)⁻¹`, `P⁺ = (I − K H) P`.
pub fn imcc_kf_step(
    state: &ConventionalState,
    model: &StateSpaceModel,
    z: &[f64],
    kernel: KernelConfig,
) -> Result<(ConventionalState, StepOutput), FilterError> {
    let pred = predict(state, model, z)?;
    let l = gain_scale(&pred, model, kernel)?;
    let (k, re_sqrt) = gain_innovation_form(&pred.p, model.h(), model.r(), l)?;
    let p_post = covariance_short_form(&pred.p, &k, model.h());
    let ops = OpCount {
        measurement_inversions: 1,
        triangular_solves: 2,
        ..OpCount::default()
    };
    finish(state, pred, &k, p_post, l, condition_estimate(&re_sqrt), ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(h: f64) -> StateSpaceModel {
        let one = Matrix::from_rows(&[[1.0]]);
        StateSpaceModel::new(
            one.clone(),
            one.clone(),
            Matrix::from_rows(&[[h]]),
            Matrix::from_rows(&[[0.0]]),
            one.clone(),
            vec![0.0],
            one,
        )
        .unwrap()
    }

    #[test]
    fn scalar_kf_by_hand() {
        let model = scalar_model(1.0);
        let s = init_conventional(&model);
        let (s, out) = kf_step(&s, &model, &[2.0]).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-15);
        assert!((s.p[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(out.gain_scale, 1.0);
        assert_eq!(out.innovation, vec![2.0]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn scalar_mcc_with_unit_l() {
        let model = scalar_model(1.0);
        let s = init_conventional(&model);
        let wide = KernelConfig::Fixed(1e150);
        for f in [mcc_kf_step_original, mcc_kf_step_lemma, imcc_kf_step] {
            let (s, out) = f(&s, &model, &[2.0], wide).unwrap();
            assert_eq!(out.gain_scale, 1.0);
            assert!((s.x[0] - 1.0).abs() < 1e-15);
            assert!((s.p[(0, 0)] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_observation_matrix_keeps_prior() {
        let model = scalar_model(0.0);
        let s = ConventionalState {
            x: vec![3.0],
            p: Matrix::from_rows(&[[2.0]]),
            step: 0,
        };
        let (s, out) = kf_step(&s, &model, &[7.0]).unwrap();
        assert_eq!(s.x, out.x_prior);
        assert_eq!(s.p[(0, 0)], 2.0);
    }

    #[test]
    fn inversion_budget() {
        let model = crate::model::build_example1();
        let s = init_conventional(&model);
        let z = [1.0, 2.0];
        let (_, orig) = mcc_kf_step_original(&s, &model, &z, KernelConfig::Adaptive).unwrap();
        let (_, imcc) = imcc_kf_step(&s, &model, &z, KernelConfig::Adaptive).unwrap();
        assert_eq!((orig.ops.state_inversions, orig.ops.measurement_inversions), (2, 1));
        assert_eq!((imcc.ops.state_inversions, imcc.ops.measurement_inversions), (0, 1));
    }

    #[test]
    fn adaptive_scaling_is_constant() {
        let model = crate::model::build_example1();
        let (_, out) = imcc_kf_step(&init_conventional(&model), &model, &[4.0, -1.0], KernelConfig::Adaptive).unwrap();
        assert_eq!(out.gain_scale, (-0.5_f64).exp());
    }
}
