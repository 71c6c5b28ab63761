//! Array (square-root) forms of the IMCC-KF.
//!
//! Both variants carry the upper factor `S` with `P = Sᵀ S` and update it by
//! orthogonal triangularization of a pre-array. The extended variant also
//! carries `ξ = S⁻ᵀ x̂` as an extra pre-array column so the estimate falls out
//! of the post-array without a solve against `R_e^L`.

use super::kernel::{compute_l_factored, KernelConfig};
use super::{check_measurement, FactoredMean, FactoredState, FilterError, OpCount, StepOutput};
use crate::linalg::{
    cholesky_upper, condition_estimate, solve_upper_transposed, triangularize, Matrix, UpperTriangular,
};
use crate::model::StateSpaceModel;

pub fn init_sr(model: &StateSpaceModel) -> Result<FactoredState, FilterError> {
    Ok(FactoredState {
        mean: FactoredMean::Plain(model.x0().to_vec()),
        sqrt_cov: cholesky_upper(model.p0())?,
        step: 0,
    })
}

pub fn init_esr(model: &StateSpaceModel) -> Result<FactoredState, FilterError> {
    let s = cholesky_upper(model.p0())?;
    let xi = solve_upper_transposed(&s, model.x0())?;
    Ok(FactoredState {
        mean: FactoredMean::Normalized(xi),
        sqrt_cov: s,
        step: 0,
    })
}

fn check_state(state: &FactoredState, model: &StateSpaceModel) -> Result<(), FilterError> {
    let n = model.state_dim();
    let len = match &state.mean {
        FactoredMean::Plain(v) | FactoredMean::Normalized(v) => v.len(),
    };
    if len != n || state.sqrt_cov.dim() != n {
        return Err(FilterError::Dimension("state does not match model".into()));
    }
    Ok(())
}

/// Time-update pre-array `[S Fᵀ | extra; Q^{1/2} Gᵀ | 0]`, triangularized.
/// Returns the new factor and, when `extra` is given, the carried column.
fn time_update(
    s: &UpperTriangular,
    model: &StateSpaceModel,
    extra: Option<&[f64]>,
) -> Result<(UpperTriangular, Option<Vec<f64>>), FilterError> {
    let n = model.state_dim();
    let qg = model.q_sqrt().as_matrix().matmul_t(model.g());
    let q_rows = qg.rows();
    let cols = n + usize::from(extra.is_some());
    let mut pre = Matrix::zeros(n + q_rows, cols);
    pre.set_block(0, 0, &s.as_matrix().matmul_t(model.f()));
    pre.set_block(n, 0, &qg);
    if let Some(col) = extra {
        pre.set_col(n, 0, col);
    }
    let post = triangularize(&pre, n)?;
    let factor = UpperTriangular::from_trusted(post.block(0, 0, n, n));
    // rows below n in the extra column are the (*) block and stay unread
    let carried = extra.map(|_| post.col(n)[..n].to_vec());
    Ok((factor, carried))
}

struct MeasurementPost {
    re_sqrt: UpperTriangular,
    kbar_t: Matrix,
    s_post: UpperTriangular,
    extra: Option<Vec<f64>>,
}

/// Measurement pre-array `[R^{1/2}, 0 | a; √L S Hᵀ, S | b]`, triangularized.
fn measurement_update(
    s_prior: &UpperTriangular,
    model: &StateSpaceModel,
    l: f64,
    extra: Option<(&[f64], &[f64])>,
) -> Result<MeasurementPost, FilterError> {
    let (n, m) = (model.state_dim(), model.meas_dim());
    let cols = m + n + usize::from(extra.is_some());
    let mut pre = Matrix::zeros(m + n, cols);
    pre.set_block(0, 0, model.r_sqrt().as_matrix());
    pre.set_block(m, 0, &s_prior.as_matrix().matmul_t(model.h()).scale(l.sqrt()));
    pre.set_block(m, m, s_prior.as_matrix());
    if let Some((top, bottom)) = extra {
        pre.set_col(m + n, 0, top);
        pre.set_col(m + n, m, bottom);
    }
    let post = triangularize(&pre, m + n)?;
    Ok(MeasurementPost {
        re_sqrt: UpperTriangular::from_trusted(post.block(0, 0, m, m)),
        kbar_t: post.block(0, m, m, n),
        s_post: UpperTriangular::from_trusted(post.block(m, m, n, n)),
        extra: extra.map(|_| post.col(m + n)[m..].to_vec()),
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn finish(
    state: &FactoredState,
    x_prior: Vec<f64>,
    x_post: Vec<f64>,
    mean: FactoredMean,
    m: MeasurementPost,
    l: f64,
    innovation: Vec<f64>,
    ops: OpCount,
) -> Result<(FactoredState, StepOutput), FilterError> {
    let step = state.step + 1;
    let out = StepOutput {
        step,
        x_prior,
        x_post,
        p_post: m.s_post.gram(),
        gain_scale: l,
        innovation,
        re_condition: condition_estimate(&m.re_sqrt),
        failed: false,
        ops,
    }
    .check_finite()?;
    if !m.s_post.as_matrix().is_finite() {
        return Err(FilterError::NonFinite);
    }
    Ok((
        FactoredState {
            mean,
            sqrt_cov: m.s_post,
            step,
        },
        out,
    ))
}

/// Square-root IMCC-KF step.
pub fn sr_imcc_step(
    state: &FactoredState,
    model: &StateSpaceModel,
    z: &[f64],
    kernel: KernelConfig,
) -> Result<(FactoredState, StepOutput), FilterError> {
    check_measurement(model, z)?;
    check_state(state, model)?;
    let x = match &state.mean {
        FactoredMean::Plain(x) => x,
        FactoredMean::Normalized(_) => return Err(FilterError::WrongState),
    };
    let (s_prior, _) = time_update(&state.sqrt_cov, model, None)?;
    let x_prior = model.propagate_mean(x, state.step);
    let residual = sub(&x_prior, &model.propagate_mean(x, state.step));
    let innovation = sub(z, &model.h().mul_vec(&x_prior));
    let l = compute_l_factored(&innovation, model.r_sqrt(), &residual, &s_prior, kernel)?;

    let post = measurement_update(&s_prior, model, l, None)?;
    // x⁺ = x⁻ + √L K̄ (R_e^L)^{-T/2} e
    let ebar = solve_upper_transposed(&post.re_sqrt, &innovation)?;
    let correction = post.kbar_t.t_mul_vec(&ebar);
    let sl = l.sqrt();
    let x_post: Vec<f64> = x_prior.iter().zip(&correction).map(|(a, c)| a + sl * c).collect();
    let ops = OpCount {
        triangularizations: 2,
        triangular_solves: 3,
        ..OpCount::default()
    };
    let mean = FactoredMean::Plain(x_post.clone());
    finish(state, x_prior, x_post, mean, post, l, innovation, ops)
}

/// Extended square-root IMCC-KF step.
pub fn esr_imcc_step(
    state: &FactoredState,
    model: &StateSpaceModel,
    z: &[f64],
    kernel: KernelConfig,
) -> Result<(FactoredState, StepOutput), FilterError> {
    check_measurement(model, z)?;
    check_state(state, model)?;
    let xi = match &state.mean {
        FactoredMean::Normalized(xi) => xi,
        FactoredMean::Plain(_) => return Err(FilterError::WrongState),
    };
    let mut ops = OpCount {
        triangularizations: 2,
        triangular_solves: 3,
        ..OpCount::default()
    };
    let (s_prior, carried) = time_update(&state.sqrt_cov, model, Some(xi))?;
    let mut xi_prior = carried.expect("time update carries the normalized mean");
    if let Some(d) = model.drift_at(state.step) {
        let shift = solve_upper_transposed(&s_prior, d)?;
        xi_prior.iter_mut().zip(&shift).for_each(|(a, b)| *a += b);
        ops.triangular_solves += 1;
    }
    let x_prior = s_prior.t_mul_vec(&xi_prior);
    let x_prev = state.sqrt_cov.t_mul_vec(xi);
    let residual = sub(&x_prior, &model.propagate_mean(&x_prev, state.step));
    let innovation = sub(z, &model.h().mul_vec(&x_prior));
    let l = compute_l_factored(&innovation, model.r_sqrt(), &residual, &s_prior, kernel)?;

    let sl = l.sqrt();
    let zbar: Vec<f64> = solve_upper_transposed(model.r_sqrt(), z)?
        .into_iter()
        .map(|v| -sl * v)
        .collect();
    let post = measurement_update(&s_prior, model, l, Some((&zbar, &xi_prior)))?;
    let xi_post = post.extra.clone().expect("measurement update carries the normalized mean");
    let x_post = post.s_post.t_mul_vec(&xi_post);
    let mean = FactoredMean::Normalized(xi_post);
    finish(state, x_prior, x_post, mean, post, l, innovation, ops)
}
