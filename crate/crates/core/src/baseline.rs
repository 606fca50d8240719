//! Classical multivariate L2 FPCA that ignores the manifold, and its geodesic
//! FVE for head-to-head comparison with the Riemannian fit.
//!
//! Reconstructions generally leave the manifold; they are projected back
//! (normalization on spheres, polar projection on SO(3)) before geodesic
//! distances are taken, and the residual variance is normalized by the same
//! `U_0` as the Riemannian fit (squared distance to its Fréchet mean curve).

use crate::error::{Error, Result};
use crate::fpca::{combine, fit_curves};
use crate::geo::{lonlat_to_s2, s2_to_lonlat};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::rfpca::{FitWarning, FveReport, ZERO_VARIANCE};
use crate::trajectory::{shared_grid, TrajectorySample};

/// Coordinates in which the L2 analysis runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum L2Chart {
    /// Ambient Euclidean coordinates of the embedding.
    #[default]
    Ambient,
    /// Longitude/latitude in degrees; only for `S^2`.
    LonLat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2Model {
    pub source: ManifoldSpec,
    pub chart: L2Chart,
    pub grid: Vec<f64>,
    /// Pointwise Euclidean average, in chart coordinates.
    pub mean: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<Vec<f64>>>,
    pub scores: Vec<Vec<f64>>,
    /// Euclidean FVE for `K = 1..=k_max`.
    pub fve: Vec<f64>,
    pub subject_ids: Vec<String>,
    pub warnings: Vec<FitWarning>,
}

impl L2Model {
    pub fn k_max(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Chart-coordinate reconstruction `mean(t_j) + sum_{k<K} xi_k phi_k(t_j)`.
    pub fn reconstruct_chart(&self, scores: &[f64], k: usize) -> Result<Vec<Vec<f64>>> {
        if k > self.k_max() || k > scores.len() {
            return Err(Error::KOutOfRange { k, max: self.k_max() });
        }
        let dim = self.mean.first().map_or(0, |v| v.len());
        let mut out = combine(&self.eigenfunctions, scores, k, self.grid.len(), dim);
        for (row, mu) in out.iter_mut().zip(&self.mean) {
            row.iter_mut().zip(mu).for_each(|(x, m)| *x += m);
        }
        Ok(out)
    }

    /// Reconstruction mapped back onto the manifold.
    pub fn reconstruct_on_manifold(&self, scores: &[f64], k: usize) -> Result<Vec<Point>> {
        self.reconstruct_chart(scores, k)?.iter().map(|x| from_chart(&self.source, self.chart, x)).collect()
    }
}

fn to_chart(chart: L2Chart, x: &[f64]) -> Vec<f64> {
    match chart {
        L2Chart::Ambient => x.to_vec(),
        L2Chart::LonLat => {
            let (lon, lat) = s2_to_lonlat(x);
            vec![lon, lat]
        }
    }
}

fn from_chart(spec: &ManifoldSpec, chart: L2Chart, x: &[f64]) -> Result<Point> {
    match chart {
        L2Chart::Ambient => Ok(Point::new(spec.project(x)?)),
        L2Chart::LonLat => lonlat_to_s2(x[0], x[1].clamp(-90.0, 90.0)),
    }
}

pub fn fit_l2_fpca(spec: &ManifoldSpec, samples: &[TrajectorySample], k_max: usize, chart: L2Chart) -> Result<L2Model> {
    if chart == L2Chart::LonLat && !(spec.kind() == ManifoldKind::Sphere && spec.intrinsic_dim() == 2) {
        return Err(Error::InvalidConfig("the lon/lat chart is only available on sphere:2".into()));
    }
    let grid = shared_grid(samples)?.to_vec();
    let m = grid.len();
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 subjects, got {n}")));
    }
    let mut coords: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    for s in samples {
        let mut curve = Vec::with_capacity(m);
        for p in &s.points {
            spec.check_len(&p.coords)?;
            curve.push(to_chart(chart, &p.coords));
        }
        coords.push(curve);
    }
    let dim = coords[0][0].len();
    let mut mean = vec![vec![0.0; dim]; m];
    for curve in &coords {
        for (mu, x) in mean.iter_mut().zip(curve) {
            mu.iter_mut().zip(x).for_each(|(a, b)| *a += b);
        }
    }
    mean.iter_mut().flatten().for_each(|a| *a /= n as f64);
    let centered: Vec<Vec<Vec<f64>>> = coords
        .iter()
        .map(|curve| curve.iter().zip(&mean).map(|(x, mu)| x.iter().zip(mu).map(|(a, b)| a - b).collect()).collect())
        .collect();
    let fit = fit_curves(&centered, k_max)?;
    let mut warnings = Vec::new();
    if let Some(first_zero) = fit.first_zero {
        warnings.push(FitWarning::RankDeficient { first_zero });
    }

    // Euclidean residual variances in chart coordinates.
    let mut totals = vec![0.0; k_max + 1];
    for (curve, scores) in centered.iter().zip(&fit.scores) {
        for (k, total) in totals.iter_mut().enumerate() {
            let approx = combine(&fit.eigenfunctions, scores, k, m, dim);
            let sq: f64 = curve
                .iter()
                .zip(&approx)
                .map(|(v, w)| v.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .sum();
            *total += sq / (m * n) as f64;
        }
    }
    let fve = if totals[0] < ZERO_VARIANCE {
        warnings.push(FitWarning::ZeroVariance);
        vec![f64::NAN; k_max]
    } else {
        totals[1..].iter().map(|u| (totals[0] - u) / totals[0]).collect()
    };

    Ok(L2Model {
        source: *spec,
        chart,
        grid,
        mean,
        eigenvalues: fit.eigenvalues,
        eigenfunctions: fit.eigenfunctions,
        scores: fit.scores,
        fve,
        subject_ids: samples.iter().map(|s| s.subject_id.clone()).collect(),
        warnings,
    })
}

/// Geodesic FVE of the L2 reconstructions; `reference_mean` is the Riemannian
/// Fréchet mean curve that defines `U_0`.
pub fn geodesic_fve_l2(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    model: &L2Model,
    reference_mean: &[Point],
    k: usize,
) -> Result<FveReport> {
    let m = shared_grid(samples)?.len();
    if m != model.grid.len() || reference_mean.len() != m {
        return Err(Error::GridMismatch("samples, L2 model and reference mean disagree on the grid".into()));
    }
    if samples.len() != model.scores.len() {
        return Err(Error::InvalidConfig(format!(
            "model has scores for {} subjects, got {} samples",
            model.scores.len(),
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mut u0 = 0.0;
    let mut uk = 0.0;
    for (sample, scores) in samples.iter().zip(&model.scores) {
        let recon = model.reconstruct_on_manifold(scores, k)?;
        for ((x, mu), y) in sample.points.iter().zip(reference_mean).zip(&recon) {
            u0 += spec.distance(&x.coords, &mu.coords).powi(2);
            uk += spec.distance(&x.coords, &y.coords).powi(2);
        }
    }
    u0 /= n * m as f64;
    uk /= n * m as f64;
    if u0 < ZERO_VARIANCE {
        return Err(Error::ZeroVariance);
    }
    Ok(FveReport { u0, uk, fve: (u0 - uk) / u0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let spec = ManifoldSpec::sphere(2).unwrap();
        let pts = vec![Point::new(vec![0.0, 0.6, 0.8]); 4];
        let samples: Vec<_> =
            (0..3).map(|i| TrajectorySample::on_uniform_grid(i.to_string(), pts.clone()).unwrap()).collect();
        let model = fit_l2_fpca(&spec, &samples, 2, L2Chart::Ambient).unwrap();
        assert!(model.eigenvalues.iter().all(|&l| l == 0.0));
        for mu in &model.mean {
            assert!((mu[1] - 0.6).abs() < 1e-15 && (mu[2] - 0.8).abs() < 1e-15);
        }
        let err = geodesic_fve_l2(&spec, &samples, &model, &pts, 1).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance));
    }

    #[test]
    fn lonlat_chart_only_on_s2() {
        let spec = ManifoldSpec::sphere(3).unwrap();
        let pts = vec![Point::new(vec![0.0, 0.0, 0.0, 1.0]); 3];
        let samples: Vec<_> =
            (0..2).map(|i| TrajectorySample::on_uniform_grid(i.to_string(), pts.clone()).unwrap()).collect();
        assert!(fit_l2_fpca(&spec, &samples, 1, L2Chart::LonLat).is_err());
    }
}
