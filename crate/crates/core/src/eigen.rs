//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, in the order the sweeps leave them.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Diagonalizes the row-major `n x n` symmetric matrix `a` by cyclic Jacobi
/// rotations until the off-diagonal Frobenius norm is below
/// `tolerance * ||A||_F`.
pub fn jacobi_eigen(a: &[f64], n: usize, tolerance: f64) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, actual: a.len() });
    }
    let mut a = a.to_vec();
    // Symmetrize so tiny accumulation asymmetries cannot stall the sweeps.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = tolerance * a.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p].abs(), a[q * n + q].abs());
                let small = 100.0 * apq.abs();
                if app + small == app && aqq + small == aqq {
                    // Below rounding level of both diagonals.
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a, n);
        if off > target {
            return Err(Error::NoConvergence { iterations: MAX_SWEEPS, gradient_norm: off });
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = (0..n).map(|k| (0..n).map(|i| v[i * n + k]).collect()).collect();
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    sum.sqrt()
}

/// Relative gap below which two magnitudes count as tied in [`fix_sign`].
pub const SIGN_TIE_TOLERANCE: f64 = 1e-9;

/// Flips `v` so its entry of largest magnitude is positive. Magnitudes within
/// [`SIGN_TIE_TOLERANCE`] of the maximum tie, and the lowest such index wins.
/// Returns whether `v` was flipped.
pub fn fix_sign(v: &mut [f64]) -> bool {
    let largest = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let threshold = largest * (1.0 - SIGN_TIE_TOLERANCE);
    let flip = v.iter().find(|x| x.abs() >= threshold).is_some_and(|&x| x < 0.0);
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    flip
}
