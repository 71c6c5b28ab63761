//! Algebraically equivalent gain and posterior-covariance expressions for
//! the correntropy-scaled measurement update.
//!
//! With `L` the scalar gain scaling and `R_e^L = L H P Hᵀ + R`:
//!
//! | function                        | expression                                   |
//! |---------------------------------|----------------------------------------------|
//! | [`gain_information_form`]       | `(P⁻¹ + L Hᵀ R⁻¹ H)⁻¹ L Hᵀ R⁻¹`               |
//! | [`gain_posterior_form`]         | `P⁺ L Hᵀ R⁻¹`                                 |
//! | [`gain_innovation_form`]        | `P L Hᵀ (R_e^L)⁻¹`                            |
//! | [`covariance_information_form`] | `(P⁻¹ + L Hᵀ R⁻¹ H)⁻¹`                        |
//! | [`covariance_short_form`]       | `(I − K H) P`                                 |
//! | [`covariance_scaled_joseph`]    | `(I − K H) P (I − L K H)ᵀ + K R Kᵀ`           |
//! | [`covariance_joseph`]           | `(I − K H) P (I − K H)ᵀ + K R Kᵀ`             |
//!
//! All but the last agree for every `L`; the Joseph form is only consistent
//! with the others at `L = 1`.

use crate::linalg::{cholesky_solve, cholesky_upper, invert, LinalgError, Matrix, UpperTriangular};

pub fn gain_information_form(p_prior: &Matrix, h: &Matrix, r: &Matrix, l: f64) -> Result<Matrix, LinalgError> {
    let p_inv = invert(p_prior)?;
    let r_inv = invert(r)?;
    let ht_rinv = h.t_matmul(&r_inv).scale(l);
    let info = &p_inv + &ht_rinv.matmul(h);
    Ok(invert(&info)?.matmul(&ht_rinv))
}

pub fn gain_posterior_form(p_post: &Matrix, h: &Matrix, r: &Matrix, l: f64) -> Result<Matrix, LinalgError> {
    let r_inv = invert(r)?;
    Ok(p_post.matmul_t(h).scale(l).matmul(&r_inv))
}

/// `R_e^L = L H P Hᵀ + R`, symmetrized.
pub fn scaled_innovation_cov(p_prior: &Matrix, h: &Matrix, r: &Matrix, l: f64) -> Matrix {
    (&h.matmul(p_prior).matmul_t(h).scale(l) + r).symmetrize()
}

/// Gain together with the upper factor of `R_e^L` used to apply its
/// inverse.
pub fn gain_innovation_form(
    p_prior: &Matrix,
    h: &Matrix,
    r: &Matrix,
    l: f64,
) -> Result<(Matrix, UpperTriangular), LinalgError> {
    let re = scaled_innovation_cov(p_prior, h, r, l);
    let re_sqrt = cholesky_upper(&re)?;
    // Kᵀ = (R_e^L)⁻¹ H P L
    let kt = cholesky_solve(&re_sqrt, &h.matmul(p_prior).scale(l))?;
    Ok((kt.transpose(), re_sqrt))
}

pub fn covariance_information_form(p_prior: &Matrix, h: &Matrix, r: &Matrix, l: f64) -> Result<Matrix, LinalgError> {
    let p_inv = invert(p_prior)?;
    let r_inv = invert(r)?;
    let info = &p_inv + &h.t_matmul(&r_inv).matmul(h).scale(l);
    invert(&info)
}

fn i_minus_kh(k: &Matrix, h: &Matrix, scale: f64) -> Matrix {
    let n = k.rows();
    &Matrix::identity(n) - &k.matmul(h).scale(scale)
}

pub fn covariance_short_form(p_prior: &Matrix, k: &Matrix, h: &Matrix) -> Matrix {
    i_minus_kh(k, h, 1.0).matmul(p_prior)
}

pub fn covariance_scaled_joseph(p_prior: &Matrix, k: &Matrix, h: &Matrix, r: &Matrix, l: f64) -> Matrix {
    let left = i_minus_kh(k, h, 1.0).matmul(p_prior);
    let right = i_minus_kh(k, h, l);
    &left.matmul_t(&right) + &k.matmul(r).matmul_t(k)
}

pub fn covariance_joseph(p_prior: &Matrix, k: &Matrix, h: &Matrix, r: &Matrix) -> Matrix {
    let a = i_minus_kh(k, h, 1.0);
    &a.matmul(p_prior).matmul_t(&a) + &k.matmul(r).matmul_t(k)
}
