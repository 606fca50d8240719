//! Intrinsic Fréchet means of point sets and of trajectory samples.
//!
//! The mean minimizes `M_n(p) = n^{-1} sum_i d(X_i, p)^2`. It is found with the
//! fixed-point update `p <- exp_p(step * n^{-1} sum_i log_p(X_i))`, which is a
//! Riemannian gradient step on `M_n / 2`. Uniqueness of the minimizer is
//! assumed, not verified: the solver returns the stationary point it reaches.

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point};
use crate::trajectory::{shared_grid, TrajectorySample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetConfig {
    pub max_iterations: usize,
    /// Stop once the metric norm of the mean log vector falls below this.
    pub gradient_tolerance: f64,
    pub step_size: f64,
}

impl Default for FrechetConfig {
    fn default() -> Self {
        FrechetConfig { max_iterations: 200, gradient_tolerance: 1e-10, step_size: 1.0 }
    }
}

impl FrechetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidConfig("gradient_tolerance must be positive".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        Ok(())
    }
}

/// Mean of the log-mapped points at `p`; its norm is the Riemannian gradient norm.
pub fn mean_log(spec: &ManifoldSpec, p: &[f64], points: &[&[f64]]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; p.len()];
    for x in points {
        let v = spec.log(p, x)?;
        for (a, b) in acc.iter_mut().zip(&v) {
            *a += b;
        }
    }
    let n = points.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// `M_n(p)`: mean squared geodesic distance from `p` to the data.
pub fn frechet_objective(spec: &ManifoldSpec, p: &[f64], points: &[&[f64]]) -> f64 {
    points.iter().map(|x| spec.distance(p, x).powi(2)).sum::<f64>() / points.len() as f64
}

fn ambient_average_start(spec: &ManifoldSpec, points: &[&[f64]]) -> Vec<f64> {
    let mut avg = vec![0.0; spec.ambient_dim()];
    for x in points {
        for (a, b) in avg.iter_mut().zip(x.iter()) {
            *a += b;
        }
    }
    // A degenerate average (e.g. two antipodal points) falls back to the first point.
    spec.project(&avg).unwrap_or_else(|_| points[0].to_vec())
}

pub(crate) fn mean_of_slices(
    spec: &ManifoldSpec,
    points: &[&[f64]],
    config: &FrechetConfig,
    init: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::InvalidConfig("Fréchet mean of an empty set".into()));
    }
    for x in points {
        spec.check_len(x)?;
    }
    let mut p = match init {
        Some(init) => {
            spec.check_len(init)?;
            init.to_vec()
        }
        None => ambient_average_start(spec, points),
    };
    let mut gradient_norm = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let g = mean_log(spec, &p, points)?;
        gradient_norm = spec.norm(&g);
        if gradient_norm <= config.gradient_tolerance {
            return Ok(p);
        }
        let step: Vec<f64> = g.iter().map(|x| x * config.step_size).collect();
        p = spec.exp(&p, &step);
    }
    let g = mean_log(spec, &p, points)?;
    let last = spec.norm(&g);
    if last <= config.gradient_tolerance {
        return Ok(p);
    }
    Err(Error::NoConvergence { iterations: config.max_iterations, gradient_norm: gradient_norm.min(last) })
}

pub fn frechet_mean_point(
    spec: &ManifoldSpec,
    points: &[Point],
    config: &FrechetConfig,
    init: Option<&Point>,
) -> Result<Point> {
    config.validate()?;
    let slices: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    mean_of_slices(spec, &slices, config, init.map(|p| p.as_slice())).map(Point::new)
}

/// Pointwise Fréchet mean curve, warm-started along the grid.
pub fn frechet_mean_curve(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    config: &FrechetConfig,
) -> Result<Vec<Point>> {
    mean_curve(spec, samples, config, true)
}

/// Like [`frechet_mean_curve`] but every time point starts from the ambient average.
pub fn frechet_mean_curve_cold(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    config: &FrechetConfig,
) -> Result<Vec<Point>> {
    mean_curve(spec, samples, config, false)
}

fn mean_curve(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    config: &FrechetConfig,
    warm: bool,
) -> Result<Vec<Point>> {
    config.validate()?;
    let m = shared_grid(samples)?.len();
    let mut curve: Vec<Point> = Vec::with_capacity(m);
    for j in 0..m {
        let slices: Vec<&[f64]> = samples.iter().map(|s| s.points[j].as_slice()).collect();
        let init = if warm { curve.last().map(|p| p.as_slice()) } else { None };
        let mean = mean_of_slices(spec, &slices, config, init).map_err(|e| e.at_time(j))?;
        curve.push(Point::new(mean));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn s2() -> ManifoldSpec {
        ManifoldSpec::sphere(2).unwrap()
    }

    #[test]
    fn singleton_mean() {
        let p = Point::new(vec![1.0, 0.0, 0.0]);
        let mean = frechet_mean_point(&s2(), std::slice::from_ref(&p), &FrechetConfig::default(), None).unwrap();
        assert_eq!(mean, p);
    }

    #[test]
    fn symmetric_pair_mean() {
        let pts = [Point::new(vec![1.0, 0.0, 0.0]), Point::new(vec![0.0, 1.0, 0.0])];
        let mean = frechet_mean_point(&s2(), &pts, &FrechetConfig::default(), None).unwrap();
        assert!((mean.coords[0] - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((mean.coords[1] - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(mean.coords[2].abs() < 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn asymmetric_pair_mean_is_midpoint() {
        let pts = [Point::new(vec![1.0, 0.0, 0.0]), Point::new(vec![0.0, 0.6, 0.8])];
        let mean = frechet_mean_point(&s2(), &pts, &FrechetConfig::default(), None).unwrap();
        let expected = [0.707107, 0.424264, 0.565685];
        for (a, b) in mean.coords.iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{:?}", mean.coords);
        }
    }

    #[test]
    fn reports_no_convergence() {
        let pts = [Point::new(vec![1.0, 0.0, 0.0]), Point::new(vec![0.0, 0.6, 0.8])];
        let config = FrechetConfig { max_iterations: 1, gradient_tolerance: 1e-30, step_size: 0.1 };
        let err = frechet_mean_point(&s2(), &pts, &config, None).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 1, .. }));
    }

    #[test]
    fn rejects_bad_config() {
        let pts = [Point::new(vec![1.0, 0.0, 0.0])];
        let config = FrechetConfig { step_size: 0.0, ..Default::default() };
        assert!(frechet_mean_point(&s2(), &pts, &config, None).is_err());
        assert!(frechet_mean_point(&s2(), &[], &FrechetConfig::default(), None).is_err());
    }

    #[test]
    fn antipodal_iterate_propagates_log_error() {
        let pts = [Point::new(vec![0.0, 0.0, 1.0])];
        let init = Point::new(vec![0.0, 0.0, -1.0]);
        let err = frechet_mean_point(&s2(), &pts, &FrechetConfig::default(), Some(&init)).unwrap_err();
        assert!(matches!(err, Error::LogUndefined { .. }));
    }
}
