//! Small dense symmetric eigenproblems.
//!
//! All matrices met by the geometry code are tiny (at most `m + n` with
//! `m <= 3` in practice), so a closed form is used for 1x1 and 2x2 and a
//! cyclic Jacobi sweep otherwise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a symmetric matrix.
///
/// Eigenvalues are returned ascending; column `k` of the returned matrix is
/// the unit eigenvector belonging to eigenvalue `k`.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!(
            "eigenproblem on {}x{}",
            n,
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let (vals, vecs) = match n {
        0 => (Vec::new(), DMatrix::zeros(0, 0)),
        1 => (vec![a[(0, 0)]], DMatrix::identity(1, 1)),
        2 => eigen_2x2(a[(0, 0)], 0.5 * (a[(0, 1)] + a[(1, 0)]), a[(1, 1)]),
        _ => jacobi(a)?,
    };
    Ok(sort_ascending(vals, vecs))
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    symmetric_eigen(a).map(|(v, _)| v)
}

fn eigen_2x2(a: f64, b: f64, c: f64) -> (Vec<f64>, DMatrix<f64>) {
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    let rad = half_diff.hypot(b);
    let (l_lo, l_hi) = (mean - rad, mean + rad);
    if b == 0.0 {
        // already diagonal; keep the coordinate basis
        let vecs = DMatrix::identity(2, 2);
        return (vec![a, c], vecs);
    }
    // Rotation angle that diagonalises [[a, b], [b, c]].
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    // column 0 -> eigenvalue mean + rad, column 1 -> mean - rad
    let vecs = DMatrix::from_row_slice(2, 2, &[co, -s, s, co]);
    (vec![l_hi, l_lo], vecs)
}

fn jacobi(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut m = a.clone();
    // symmetrise against round-off in the caller
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            let vals = (0..n).map(|i| m[(i, i)]).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::EigenFailure)
}

fn sort_ascending(vals: Vec<f64>, vecs: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs.set_column(dst, &vecs.column(src));
    }
    (sorted_vals, sorted_vecs)
}

/// Inverse of a small symmetric positive definite matrix.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMetric);
    }
    let inv = a.clone().cholesky().ok_or(Error::SingularMetric)?.inverse();
    // restore exact symmetry
    Ok((&inv + inv.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(a: &DMatrix<f64>) {
        let (vals, vecs) = symmetric_eigen(a).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let n = a.nrows();
        for k in 0..n {
            let v = vecs.column(k);
            let av = a * v;
            for i in 0..n {
                assert!((av[i] - vals[k] * v[i]).abs() < 1e-12, "residual {:?}", av);
            }
        }
        let vtv = vecs.transpose() * &vecs;
        assert!((vtv - DMatrix::identity(n, n)).amax() < 1e-12);
    }

    #[test]
    fn diagonal_2x2_sorted() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.2]);
        let vals = symmetric_eigenvalues(&a).unwrap();
        assert_eq!(vals, vec![0.2, 0.5]);
    }

    #[test]
    fn closed_form_and_jacobi() {
        check_decomposition(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 3.0]));
        check_decomposition(&DMatrix::from_row_slice(2, 2, &[1.0, 1e-9, 1e-9, 1.0]));
        check_decomposition(&DMatrix::from_row_slice(
            3,
            3,
            &[4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0],
        ));
        check_decomposition(&DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            ],
        ));
    }

    #[test]
    fn nan_is_reported() {
        let a = DMatrix::from_row_slice(3, 3, &[f64::NAN, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(symmetric_eigen(&a).unwrap_err(), Error::EigenFailure);
    }
}
