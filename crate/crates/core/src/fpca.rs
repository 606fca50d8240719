//! Multivariate functional PCA on curves of `R^{d0}` vectors sampled on a shared
//! uniform grid. Shared by the Riemannian estimator and the L2 baseline.
//!
//! Each curve is stacked coordinate-major (`vec[c * m + j] = V(t_j)[c]`), the
//! covariance `G = n^{-1} sum_i vec_i vec_i^T` is diagonalized, and the spectrum
//! is rescaled to the function-space convention with uniform weights `1/m`:
//! `Phi_k = sqrt(m) psi_k`, `lambda_k = omega_k / m`, `xi_ik = vec_i . Phi_k / m`.

use std::cmp::Ordering;

use crate::eigen::{fix_sign, jacobi_eigen};
use crate::error::{Error, Result};

pub const EIGEN_TOLERANCE: f64 = 1e-12;
/// Eigenvalues below this are reported as exactly zero.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FpcaFit {
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[k][j]` is the `d0`-vector `phi_k(t_j)`.
    pub eigenfunctions: Vec<Vec<Vec<f64>>>,
    /// `scores[i][k]`.
    pub scores: Vec<Vec<f64>>,
    /// Index of the first retained eigenvalue that was clamped to zero.
    pub first_zero: Option<usize>,
}

pub fn stack(curve: &[Vec<f64>]) -> Vec<f64> {
    let m = curve.len();
    let d0 = curve.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; m * d0];
    for (j, v) in curve.iter().enumerate() {
        for (c, x) in v.iter().enumerate() {
            out[c * m + j] = *x;
        }
    }
    out
}

pub fn unstack(vec: &[f64], m: usize) -> Vec<Vec<f64>> {
    let d0 = vec.len() / m;
    (0..m).map(|j| (0..d0).map(|c| vec[c * m + j]).collect()).collect()
}

/// Fits the top `k_max` components of the uncentered curves `curves[i][j]`.
pub fn fit_curves(curves: &[Vec<Vec<f64>>], k_max: usize) -> Result<FpcaFit> {
    let n = curves.len();
    let m = curves.first().map_or(0, |c| c.len());
    let d0 = curves.first().and_then(|c| c.first()).map_or(0, |v| v.len());
    let size = m * d0;
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 subjects, got {n}")));
    }
    if k_max == 0 || k_max > n.min(size) {
        return Err(Error::KOutOfRange { k: k_max, max: n.min(size) });
    }
    let stacked: Vec<Vec<f64>> = curves.iter().map(|c| stack(c)).collect();
    for s in &stacked {
        if s.len() != size {
            return Err(Error::DimensionMismatch { expected: size, actual: s.len() });
        }
    }

    // Upper triangle, accumulated in subject order so results are reproducible.
    let mut cov = vec![0.0; size * size];
    for s in &stacked {
        for a in 0..size {
            let sa = s[a];
            if sa == 0.0 {
                continue;
            }
            let row = &mut cov[a * size..(a + 1) * size];
            for b in a..size {
                row[b] += sa * s[b];
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for a in 0..size {
        for b in a..size {
            let v = cov[a * size + b] * inv_n;
            cov[a * size + b] = v;
            cov[b * size + a] = v;
        }
    }

    let eig = jacobi_eigen(&cov, size, EIGEN_TOLERANCE)?;
    let mf = m as f64;
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .values
        .into_iter()
        .zip(eig.vectors)
        .map(|(omega, mut psi)| {
            fix_sign(&mut psi);
            let lambda = omega / mf;
            (if lambda < ZERO_EIGENVALUE { 0.0 } else { lambda }, psi)
        })
        .collect();
    pairs.sort_by(|a, b| match b.0.total_cmp(&a.0) {
        Ordering::Equal => lexicographic(&b.1, &a.1),
        other => other,
    });
    pairs.truncate(k_max);

    let sqrt_m = mf.sqrt();
    let mut eigenvalues = Vec::with_capacity(k_max);
    let mut phis = Vec::with_capacity(k_max);
    for (lambda, psi) in pairs {
        eigenvalues.push(lambda);
        phis.push(psi.into_iter().map(|x| x * sqrt_m).collect::<Vec<f64>>());
    }
    let scores = stacked
        .iter()
        .map(|s| phis.iter().map(|phi| s.iter().zip(phi).map(|(a, b)| a * b).sum::<f64>() / mf).collect())
        .collect();
    let first_zero = eigenvalues.iter().position(|&l| l == 0.0);
    Ok(FpcaFit { eigenvalues, eigenfunctions: phis.iter().map(|phi| unstack(phi, m)).collect(), scores, first_zero })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// `sum_{k<K} scores[k] * phi_k(t_j)` for every grid point.
pub fn combine(eigenfunctions: &[Vec<Vec<f64>>], scores: &[f64], k: usize, m: usize, d0: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; d0]; m];
    for (phi, xi) in eigenfunctions.iter().zip(scores).take(k) {
        for (row, f) in out.iter_mut().zip(phi) {
            for (o, x) in row.iter_mut().zip(f) {
                *o += xi * x;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stack_is_coordinate_major() {
        let curve = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(stack(&curve), vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        assert_eq!(unstack(&stack(&curve), 3), curve);
    }

    #[test]
    fn rank_one_closed_form() {
        // curves +-c * phi with m^{-1} sum |phi|^2 = 1
        let phi = [vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let c = 0.3;
        let plus: Vec<Vec<f64>> = phi.iter().map(|v| v.iter().map(|x| c * x).collect()).collect();
        let minus: Vec<Vec<f64>> = phi.iter().map(|v| v.iter().map(|x| -c * x).collect()).collect();
        let fit = fit_curves(&[plus, minus], 2).unwrap();
        assert!((fit.eigenvalues[0] - c * c).abs() < 1e-14);
        assert_eq!(fit.eigenvalues[1], 0.0);
        assert_eq!(fit.first_zero, Some(1));
        assert!((fit.scores[0][0].abs() - c).abs() < 1e-14);
        assert!((fit.scores[0][0] + fit.scores[1][0]).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_k() {
        let curve = vec![vec![1.0], vec![2.0]];
        assert!(matches!(fit_curves(&[curve.clone(), curve.clone()], 3), Err(Error::KOutOfRange { .. })));
        assert!(fit_curves(&[curve], 1).is_err());
    }
}
