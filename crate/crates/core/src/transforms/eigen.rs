//! Deterministic symmetric eigensolvers.
//!
//! Both solvers run a fixed operation sequence with no data-dependent
//! parallelism, so identical input bits give identical output bits on a
//! given build. The codec relies on this: encoder and decoder derive the same
//! GBT independently.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `diag` has length `n`, `off` has length `n - 1` (`off[i]` couples `i` and
/// `i + 1`). Returns the eigenvalues in solver order together with the
/// eigenvector matrix (column `j` pairs with eigenvalue `j`).
pub fn tridiagonal_ql(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: format!("off-diagonal of length {}", n.saturating_sub(1)),
            actual: format!("{}", off.len()),
        });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    let cap = 64 * n;
    let mut iterations = 0usize;
    let mut shift_acc = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > f64::EPSILON * tst1 {
            m += 1;
        }

        if m > l {
            loop {
                iterations += 1;
                if iterations > cap {
                    return Err(Error::NoConvergence(cap));
                }

                // Wilkinson-style shift from the leading 2x2 block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift_acc += h;

                // Implicit QL sweep from m down to l.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk1 = z[(k, i + 1)];
                        let zk = z[(k, i)];
                        z[(k, i + 1)] = s * zk + c * zk1;
                        z[(k, i)] = c * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= f64::EPSILON * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_acc;
        e[l] = 0.0;
    }

    Ok((d, z))
}

/// Cyclic Jacobi for dense symmetric matrices.
///
/// Sweeps the strict upper triangle in row-major order until the
/// off-diagonal Frobenius norm falls below `1e-12` times the matrix norm.
pub fn jacobi(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    const MAX_SWEEPS: usize = 100;
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let tol = 1e-12 * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }

        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn residual(a: &DMatrix<f64>, vals: &[f64], vecs: &DMatrix<f64>) -> f64 {
        let lambda = DMatrix::from_diagonal(&DVector::from_row_slice(vals));
        (a * vecs - vecs * lambda).amax()
    }

    #[test]
    fn ql_two_by_two() {
        let (vals, vecs) = tridiagonal_ql(&[2.0, 2.0], &[-1.0]).unwrap();
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-14);
        assert!((sorted[1] - 3.0).abs() < 1e-14);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert!(residual(&a, &vals, &vecs) < 1e-13);
    }

    #[test]
    fn ql_already_diagonal() {
        let (vals, vecs) = tridiagonal_ql(&[3.0, 1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![3.0, 1.0, 2.0]);
        assert_eq!(vecs, DMatrix::identity(3, 3));
    }

    #[test]
    fn ql_matches_dense_residual() {
        let diag = [4.0, 1.5, 3.25, 0.5, 2.0, 7.0];
        let off = [0.3, -1.2, 2.0, 0.01, -0.7];
        let (vals, vecs) = tridiagonal_ql(&diag, &off).unwrap();
        let mut a = DMatrix::from_diagonal(&DVector::from_row_slice(&diag));
        for (i, &o) in off.iter().enumerate() {
            a[(i, i + 1)] = o;
            a[(i + 1, i)] = o;
        }
        assert!(residual(&a, &vals, &vecs) < 1e-12);
        assert!((vecs.transpose() * &vecs - DMatrix::identity(6, 6)).amax() < 1e-13);
    }

    #[test]
    fn ql_rejects_bad_shapes() {
        assert!(tridiagonal_ql(&[1.0, 2.0], &[]).is_err());
        assert!(tridiagonal_ql(&[], &[]).is_err());
    }

    #[test]
    fn jacobi_dense() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, 1.0, -2.0, 0.5, //
                1.0, 3.0, 0.0, 1.5, //
                -2.0, 0.0, 5.0, -1.0, //
                0.5, 1.5, -1.0, 2.0,
            ],
        );
        let (vals, vecs) = jacobi(&a).unwrap();
        assert!(residual(&a, &vals, &vecs) < 1e-11);
        assert!((vecs.transpose() * &vecs - DMatrix::identity(4, 4)).amax() < 1e-13);
    }

    #[test]
    fn jacobi_zero_matrix() {
        let (vals, vecs) = jacobi(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(vals, vec![0.0; 3]);
        assert_eq!(vecs, DMatrix::identity(3, 3));
    }
}
