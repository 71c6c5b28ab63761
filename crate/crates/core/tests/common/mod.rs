#![allow(dead_code)]

use mcckf::linalg::Matrix;
use mcckf::model::StateSpaceModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rows = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_rows(m: &Matrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn from_rows(r: &Rows) -> Matrix {
    Matrix::try_from_rows(r).unwrap()
}

pub fn mm(a: &Rows, b: &Rows) -> Rows {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), k);
    (0..n)
        .map(|i| (0..p).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

pub fn tr(a: &Rows) -> Rows {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn add(a: &Rows, b: &Rows) -> Rows {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

pub fn scale(a: &Rows, s: f64) -> Rows {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

pub fn eye(n: usize) -> Rows {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

/// Inverse by Gauss-Jordan elimination with full pivoting.
pub fn inverse(a: &Rows) -> Rows {
    let n = a.len();
    let mut m: Rows = a.iter().zip(eye(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                if m[i][j].abs() > best {
                    (pi, pj, best) = (i, j, m[i][j].abs());
                }
            }
        }
        assert!(best > 0.0, "oracle: singular matrix");
        m.swap(k, pi);
        if pj != k {
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            col_perm.swap(k, pj);
        }
        let piv = m[k][k];
        m[k].iter_mut().for_each(|v| *v /= piv);
        for i in 0..n {
            if i != k {
                let f = m[i][k];
                if f != 0.0 {
                    let pivot_row = m[k].clone();
                    m[i].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
    }
    // undo the column permutation: rows of the inverse are permuted
    let mut inv = vec![vec![0.0; n]; n];
    for (k, &c) in col_perm.iter().enumerate() {
        inv[c] = m[k][n..].to_vec();
    }
    inv
}

/// `max |a − b| / max(max|a|, max|b|, floor)`.
pub fn rel_diff(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(floor, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn rel_diff_m(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    rel_diff(a.as_slice(), b.as_slice(), f64::MIN_POSITIVE)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Rows {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// `Aᵀ A / n + c I`, eigenvalues roughly within `[c, c + n]`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize, c: f64) -> Rows {
    let a = random_matrix(rng, n, n);
    add(&scale(&mm(&tr(&a), &a), 1.0 / n as f64), &scale(&eye(n), c))
}

/// A stable, well-conditioned model with random dimensions fixed by the
/// caller.
pub fn random_model<R: Rng>(rng: &mut R, n: usize, m: usize) -> StateSpaceModel {
    let raw = random_matrix(rng, n, n);
    let norm: f64 = raw.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let f = add(&scale(&raw, 0.5 / norm), &scale(&eye(n), 0.45));
    let mut x0 = vec![0.0; n];
    x0.iter_mut().for_each(|v| *v = rng.random_range(-2.0..2.0));
    StateSpaceModel::new(
        from_rows(&f),
        Matrix::identity(n),
        from_rows(&random_matrix(rng, m, n)),
        from_rows(&random_spd(rng, n, 0.1)),
        from_rows(&random_spd(rng, m, 0.2)),
        x0,
        from_rows(&random_spd(rng, n, 0.5)),
    )
    .unwrap()
}
