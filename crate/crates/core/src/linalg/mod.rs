//! Small dense linear algebra used by the filters.
//!
//! Triangular factors follow the upper convention `A = Uᵀ U` with a
//! nonnegative diagonal on `U`. Every orthogonal triangularization flips row
//! signs so its leading block obeys the same convention, which keeps the
//! conventional and array-form filters comparable entry by entry.

mod matrix;

use std::fmt;

pub use matrix::{dot, norm2, Matrix};

/// Relative symmetry tolerance for [`cholesky_upper`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Pivots and diagonal entries below this magnitude count as underflowed.
pub const PIVOT_UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Zero-sized matrix.
    Empty,
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NotSymmetric,
    /// Cholesky pivot at `index` was not strictly positive.
    NotPositiveDefinite {
        index: usize,
    },
    /// Leading column `column` of a pre-array has (numerically) no norm left.
    RankDeficient {
        column: usize,
    },
    /// Triangular factor with a vanishing diagonal entry.
    SingularFactor {
        index: usize,
    },
    /// General matrix with no usable pivot during inversion.
    Singular,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Empty => write!(f, "matrix has a zero dimension"),
            LinalgError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            LinalgError::NotSymmetric => write!(f, "matrix is not symmetric"),
            LinalgError::NotPositiveDefinite { index } => {
                write!(f, "matrix is not positive definite (pivot {index})")
            }
            LinalgError::RankDeficient { column } => {
                write!(f, "pre-array is rank deficient at column {column}")
            }
            LinalgError::SingularFactor { index } => {
                write!(f, "triangular factor is singular at diagonal {index}")
            }
            LinalgError::Singular => write!(f, "matrix is singular"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Square upper-triangular matrix with a nonnegative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular(Matrix);

impl UpperTriangular {
    /// Validates the triangular shape and diagonal sign.
    pub fn new(m: Matrix) -> Result<Self, LinalgError> {
        let (r, c) = m.shape();
        if r != c {
            return Err(LinalgError::NotSquare { rows: r, cols: c });
        }
        for i in 0..r {
            if !(m[(i, i)] >= 0.0) {
                return Err(LinalgError::SingularFactor { index: i });
            }
            for j in 0..i {
                if m[(i, j)] != 0.0 {
                    return Err(LinalgError::DimensionMismatch {
                        expected: (r, c),
                        got: (i, j),
                    });
                }
            }
        }
        Ok(Self(m))
    }

    /// Wraps a matrix already known to satisfy the invariants.
    pub(crate) fn from_trusted(m: Matrix) -> Self {
        debug_assert!(Self::new(m.clone()).is_ok() || !m.is_finite());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn diag(&self) -> Vec<f64> {
        self.0.diag()
    }

    /// `Uᵀ U`, symmetric with a nonnegative diagonal by construction.
    pub fn gram(&self) -> Matrix {
        let n = self.dim();
        let u = &self.0;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..=i).map(|k| u[(k, i)] * u[(k, j)]).sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// `Uᵀ v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.0.t_mul_vec(v)
    }
}

fn require_square(a: &Matrix) -> Result<usize, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(a.rows())
}

fn check_symmetric(a: &Matrix) -> Result<(), LinalgError> {
    let n = a.rows();
    let tol = SYMMETRY_TOL * a.frobenius_norm();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (a[(i, j)] - a[(j, i)]).abs();
            if !(d <= tol) {
                return Err(LinalgError::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Upper Cholesky factor `U` with `A = Uᵀ U`. No pivoting.
///
/// Only the upper triangle of `A` is read once symmetry has been checked.
pub fn cholesky_upper(a: &Matrix) -> Result<UpperTriangular, LinalgError> {
    let n = require_square(a)?;
    check_symmetric(a)?;
    let mut u = Matrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| u[(k, j)] * u[(k, j)]).sum::<f64>();
        if !(d > 0.0) {
            return Err(LinalgError::NotPositiveDefinite { index: j });
        }
        let ujj = d.sqrt();
        u[(j, j)] = ujj;
        for i in (j + 1)..n {
            let s = a[(j, i)] - (0..j).map(|k| u[(k, j)] * u[(k, i)]).sum::<f64>();
            u[(j, i)] = s / ujj;
        }
    }
    Ok(UpperTriangular(u))
}

/// Upper factor of a positive *semi*-definite matrix.
///
/// Pivots that vanish to within roundoff produce a zero row instead of an
/// error, so degenerate covariances (for example `Σ = 0`) still have a factor
/// with `Uᵀ U = A`.
pub fn psd_factor_upper(a: &Matrix) -> Result<UpperTriangular, LinalgError> {
    let n = require_square(a)?;
    check_symmetric(a)?;
    let scale = a.diag().iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let tol = (n as f64) * f64::EPSILON * scale;
    let mut u = Matrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| u[(k, j)] * u[(k, j)]).sum::<f64>();
        if d > tol {
            let ujj = d.sqrt();
            u[(j, j)] = ujj;
            for i in (j + 1)..n {
                let s = a[(j, i)] - (0..j).map(|k| u[(k, j)] * u[(k, i)]).sum::<f64>();
                u[(j, i)] = s / ujj;
            }
        } else if d >= -tol {
            // Zero pivot: the rest of the row must vanish as well.
            for i in (j + 1)..n {
                let s = a[(j, i)] - (0..j).map(|k| u[(k, j)] * u[(k, i)]).sum::<f64>();
                if s.abs() > tol.max(PIVOT_UNDERFLOW) {
                    return Err(LinalgError::NotPositiveDefinite { index: j });
                }
            }
        } else {
            return Err(LinalgError::NotPositiveDefinite { index: j });
        }
    }
    Ok(UpperTriangular(u))
}

fn scaled_norm(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let scale = v.clone().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
}

/// Orthogonal triangularization of a pre-array by Householder reflections.
///
/// The first `lead_cols` columns drive the reflectors and end up upper
/// triangular with a nonnegative diagonal; the remaining columns are carried
/// along by the same orthogonal transform. Returns the post-array, which has
/// the same shape as `pre`.
pub fn triangularize(pre: &Matrix, lead_cols: usize) -> Result<Matrix, LinalgError> {
    let (p, q) = pre.shape();
    if lead_cols > q || lead_cols > p {
        return Err(LinalgError::DimensionMismatch {
            expected: (lead_cols.max(p), q),
            got: (p, lead_cols),
        });
    }
    let mut a = pre.clone();
    let mut v = vec![0.0; p];
    for j in 0..lead_cols {
        let col = (j..p).map(|i| a[(i, j)]);
        let norm = scaled_norm(col.clone());
        if !(norm >= PIVOT_UNDERFLOW) {
            return Err(LinalgError::RankDeficient { column: j });
        }
        let tail = scaled_norm(((j + 1)..p).map(|i| a[(i, j)]));
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(j, j)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        // v = x - alpha e1; vᵀv = 2 norm (norm + |x0|)
        let len = p - j;
        v[..len].iter_mut().zip(j..p).for_each(|(vi, i)| *vi = a[(i, j)]);
        v[0] -= alpha;
        let beta = norm * (norm + x0.abs());
        for k in (j + 1)..q {
            let s: f64 = (0..len).map(|t| v[t] * a[(j + t, k)]).sum::<f64>() / beta;
            if s != 0.0 {
                for t in 0..len {
                    a[(j + t, k)] -= s * v[t];
                }
            }
        }
        a[(j, j)] = alpha;
        for i in (j + 1)..p {
            a[(i, j)] = 0.0;
        }
    }
    for j in 0..lead_cols {
        if a[(j, j)] < 0.0 {
            for k in 0..q {
                a[(j, k)] = -a[(j, k)];
            }
        }
    }
    Ok(a)
}

/// Solves `Uᵀ x = b` by forward substitution.
pub fn solve_upper_transposed(u: &UpperTriangular, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = u.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: (n, 1),
            got: (b.len(), 1),
        });
    }
    let m = u.as_matrix();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let d = m[(i, i)];
        if !(d > PIVOT_UNDERFLOW) {
            return Err(LinalgError::SingularFactor { index: i });
        }
        let s: f64 = (0..i).map(|k| m[(k, i)] * x[k]).sum();
        x[i] = (b[i] - s) / d;
    }
    Ok(x)
}

/// Solves `U x = b` by back substitution.
pub fn solve_upper(u: &UpperTriangular, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = u.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: (n, 1),
            got: (b.len(), 1),
        });
    }
    let m = u.as_matrix();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let d = m[(i, i)];
        if !(d > PIVOT_UNDERFLOW) {
            return Err(LinalgError::SingularFactor { index: i });
        }
        let s: f64 = ((i + 1)..n).map(|k| m[(i, k)] * x[k]).sum();
        x[i] = (b[i] - s) / d;
    }
    Ok(x)
}

/// Solves `(Uᵀ U) X = B` column by column.
pub fn cholesky_solve(u: &UpperTriangular, b: &Matrix) -> Result<Matrix, LinalgError> {
    let mut out = Matrix::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let y = solve_upper_transposed(u, &b.col(j))?;
        let x = solve_upper(u, &y)?;
        out.set_col(j, 0, &x);
    }
    Ok(out)
}

/// `√(vᵀ W⁻¹ v)` through the Cholesky factor of `W`.
pub fn weighted_norm(v: &[f64], w: &Matrix) -> Result<f64, LinalgError> {
    let u = cholesky_upper(w)?;
    weighted_norm_factored(v, &u)
}

/// `√(vᵀ (UᵀU)⁻¹ v)` for an already factored weight.
pub fn weighted_norm_factored(v: &[f64], u: &UpperTriangular) -> Result<f64, LinalgError> {
    let y = solve_upper_transposed(u, v)?;
    Ok(norm2(&y))
}

/// `max|diag| / min|diag|` of a triangular factor, `+∞` when a diagonal entry
/// is zero. Squaring it gives a lower bound on the 2-norm condition number
/// of `Uᵀ U`.
pub fn condition_estimate(u: &UpperTriangular) -> f64 {
    let d = u.diag();
    let max = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let min = d.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
///
/// Only the original MCC-KF recursion uses this; every other filter works
/// through factorizations and triangular solves.
pub fn invert(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = require_square(a)?;
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax >= PIVOT_UNDERFLOW) {
            return Err(LinalgError::Singular);
        }
        m.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let p = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(r, j)] -= f * m[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}
