//! Dense symmetric eigensolver (cyclic Jacobi) and a small dense inverse.

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and column eigenvectors of a symmetric matrix
/// stored row-major.
pub fn symmetric_eigen(n: usize, matrix: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if matrix.len() != n * n {
        return Err(Error::Precondition("matrix is not square".into()));
    }
    let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (matrix[i * n + j], matrix[j * n + i]);
            if (a - b).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Precondition(format!(
                    "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                )));
            }
        }
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    Ok((values, vectors))
}

/// Inverse of a dense row-major matrix by Gauss-Jordan elimination with
/// partial pivoting.
pub fn invert(n: usize, matrix: &[f64]) -> Result<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty range");
        let pv = a[pivot * n + col];
        if pv.abs() < 1e-14 {
            return Err(Error::Solver(format!("singular basis (pivot {pv:e} in column {col})")));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let r = 1.0 / pv;
        for k in 0..n {
            a[col * n + k] *= r;
            inv[col * n + k] *= r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                a[row * n + k] -= f * a[col * n + k];
                inv[row * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two() {
        let (vals, vecs) = symmetric_eigen(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vecs[0][0].abs(), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(symmetric_eigen(2, &[1.0, 2.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = [4.0, 1.0, 0.0, 1.0, 3.0, 2.0, 0.0, 2.0, 5.0];
        let inv = invert(3, &m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[i * 3 + k] * inv[k * 3 + j]).sum();
                assert_abs_diff_eq!(s, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        assert!(invert(2, &[1.0, 2.0, 2.0, 4.0]).is_err());
    }
}
