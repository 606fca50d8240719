//! Riemannian functional PCA: fit, truncated representations, residual
//! variance, fraction of variance explained and component selection.
//!
//! The fit maps every curve to the tangent spaces of its pointwise Fréchet
//! mean, runs multivariate FPCA there, and measures approximation quality back
//! on the manifold through `X_iK(t) = exp_{mu(t)}(sum_{k<=K} xi_ik phi_k(t))`.
//! Time integrals use the uniform weight `1/m` throughout.

use std::fmt;

use crate::eigen::fix_sign;
use crate::error::{Error, Result};
use crate::fpca::{combine, fit_curves, stack, unstack, FpcaFit};
use crate::frechet::{frechet_mean_curve, FrechetConfig};
use crate::manifold::{ManifoldSpec, Point};
use crate::trajectory::{shared_grid, TangentProcess, TrajectorySample};

pub const ZERO_VARIANCE: f64 = 1e-15;

/// Non-fatal conditions recorded during a fit or a selection.
#[derive(Debug, Clone, PartialEq)]
pub enum FitWarning {
    /// Retained eigenvalues from this zero-based index on are numerically zero.
    RankDeficient { first_zero: usize },
    /// All curves coincide with the mean; FVE is undefined and stored as NaN.
    ZeroVariance,
    /// No retained component reached the requested FVE threshold.
    InsufficientComponents { gamma: f64, best_fve: f64 },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::RankDeficient { first_zero } => {
                write!(f, "rank deficient: eigenvalues from component {} on are zero", first_zero + 1)
            }
            FitWarning::ZeroVariance => write!(f, "zero variance: all curves equal the mean"),
            FitWarning::InsufficientComponents { gamma, best_fve } => {
                write!(f, "insufficient components: best FVE {best_fve:.4} < gamma {gamma}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfpcaModel {
    pub spec: ManifoldSpec,
    pub grid: Vec<f64>,
    pub mean_curve: Vec<Point>,
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[k][j]`: ambient tangent vector `phi_k(t_j)`.
    pub eigenfunctions: Vec<Vec<Vec<f64>>>,
    /// `scores[i][k]`.
    pub scores: Vec<Vec<f64>>,
    /// Geodesic FVE for `K = 1..=k_max`.
    pub fve: Vec<f64>,
    pub subject_ids: Vec<String>,
    /// Set when the curves are square-root embedded compositions.
    pub compositional: bool,
    pub warnings: Vec<FitWarning>,
}

impl RfpcaModel {
    pub fn k_max(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn m(&self) -> usize {
        self.grid.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FveReport {
    pub u0: f64,
    pub uk: f64,
    pub fve: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub k: usize,
    pub warning: Option<FitWarning>,
}

pub fn compute_log_processes(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    mean_curve: &[Point],
) -> Result<Vec<TangentProcess>> {
    let m = shared_grid(samples)?.len();
    if mean_curve.len() != m {
        return Err(Error::GridMismatch(format!("mean curve has {} points, samples have {m}", mean_curve.len())));
    }
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let vectors = s
                .points
                .iter()
                .zip(mean_curve)
                .enumerate()
                .map(|(j, (x, mu))| {
                    spec.check_len(&x.coords).map_err(|e| e.at_subject(i, j))?;
                    spec.log(&mu.coords, &x.coords).map_err(|e| e.at_subject(i, j))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TangentProcess { subject_id: s.subject_id.clone(), grid: s.grid.clone(), vectors })
        })
        .collect()
}

pub fn fit_rfpca(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    config: &FrechetConfig,
    k_max: usize,
) -> Result<RfpcaModel> {
    let grid = shared_grid(samples)?.to_vec();
    let n = samples.len();
    let bound = n.min(grid.len() * spec.intrinsic_dim());
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 subjects, got {n}")));
    }
    if k_max == 0 || k_max > bound {
        return Err(Error::KOutOfRange { k: k_max, max: bound });
    }
    let mean_curve = frechet_mean_curve(spec, samples, config)?;
    let processes = compute_log_processes(spec, samples, &mean_curve)?;
    let fit = fit_in_tangent_coordinates(spec, &mean_curve, &processes, k_max)?;

    let mut warnings = Vec::new();
    if let Some(first_zero) = fit.first_zero {
        warnings.push(FitWarning::RankDeficient { first_zero });
    }
    let mut model = RfpcaModel {
        spec: *spec,
        grid,
        mean_curve,
        eigenvalues: fit.eigenvalues,
        eigenfunctions: fit.eigenfunctions,
        scores: fit.scores,
        fve: Vec::new(),
        subject_ids: samples.iter().map(|s| s.subject_id.clone()).collect(),
        compositional: false,
        warnings,
    };
    let (u0, residuals) = residual_variances(spec, samples, &model)?;
    if u0 < ZERO_VARIANCE {
        model.fve = vec![f64::NAN; k_max];
        model.warnings.push(FitWarning::ZeroVariance);
    } else {
        model.fve = residuals[1..].iter().map(|uk| (u0 - uk) / u0).collect();
    }
    Ok(model)
}

/// FPCA in orthonormal tangent coordinates at each mean point, mapped back to
/// ambient eigenfunctions. Every eigenfunction, including those of zero
/// eigenvalues, is tangent to the mean curve.
fn fit_in_tangent_coordinates(
    spec: &ManifoldSpec,
    mean_curve: &[Point],
    processes: &[TangentProcess],
    k_max: usize,
) -> Result<FpcaFit> {
    let bases: Vec<Vec<Vec<f64>>> = mean_curve.iter().map(|mu| spec.tangent_basis(&mu.coords)).collect();
    let coordinates: Vec<Vec<Vec<f64>>> = processes
        .iter()
        .map(|p| p.vectors.iter().zip(&bases).map(|(v, basis)| basis.iter().map(|e| dot(e, v)).collect()).collect())
        .collect();
    let mut fit = fit_curves(&coordinates, k_max)?;
    let d0 = spec.ambient_dim();
    for (k, phi) in fit.eigenfunctions.iter_mut().enumerate() {
        let ambient: Vec<Vec<f64>> = phi
            .iter()
            .zip(&bases)
            .map(|(c, basis)| {
                let mut v = vec![0.0; d0];
                for (ca, e) in c.iter().zip(basis) {
                    v.iter_mut().zip(e).for_each(|(x, ei)| *x += ca * ei);
                }
                v
            })
            .collect();
        let mut stacked = stack(&ambient);
        if fix_sign(&mut stacked) {
            fit.scores.iter_mut().for_each(|s| s[k] = -s[k]);
        }
        *phi = unstack(&stacked, ambient.len());
    }
    Ok(fit)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tangent and manifold curves of the `K`-truncated representation for one subject.
pub fn truncate_representation(model: &RfpcaModel, scores: &[f64], k: usize) -> Result<(Vec<Vec<f64>>, Vec<Point>)> {
    if k > model.k_max() || k > scores.len() {
        return Err(Error::KOutOfRange { k, max: model.k_max().min(scores.len()) });
    }
    let d0 = model.spec.ambient_dim();
    let tangent = combine(&model.eigenfunctions, scores, k, model.m(), d0);
    let points =
        tangent.iter().zip(&model.mean_curve).map(|(v, mu)| Point::new(model.spec.exp(&mu.coords, v))).collect();
    Ok((tangent, points))
}

/// `(U_0, [U_0, U_1, ..., U_kmax])`.
fn residual_variances(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    model: &RfpcaModel,
) -> Result<(f64, Vec<f64>)> {
    check_model_samples(samples, model)?;
    let n = samples.len() as f64;
    let m = model.m() as f64;
    let mut totals = vec![0.0; model.k_max() + 1];
    for (sample, scores) in samples.iter().zip(&model.scores) {
        for (k, total) in totals.iter_mut().enumerate() {
            let (_, recon) = truncate_representation(model, scores, k)?;
            let sq: f64 =
                sample.points.iter().zip(&recon).map(|(x, y)| spec.distance(&x.coords, &y.coords).powi(2)).sum();
            *total += sq / m;
        }
    }
    totals.iter_mut().for_each(|t| *t /= n);
    Ok((totals[0], totals))
}

fn check_model_samples(samples: &[TrajectorySample], model: &RfpcaModel) -> Result<()> {
    let grid = shared_grid(samples)?;
    if grid.len() != model.m() {
        return Err(Error::GridMismatch(format!("model grid has {} points, samples have {}", model.m(), grid.len())));
    }
    if samples.len() != model.scores.len() {
        return Err(Error::InvalidConfig(format!(
            "model has scores for {} subjects, got {} samples",
            model.scores.len(),
            samples.len()
        )));
    }
    Ok(())
}

/// Residual variance `U_K`, its `K = 0` reference `U_0`, and `FVE_K = (U_0 - U_K) / U_0`.
pub fn compute_fve(
    spec: &ManifoldSpec,
    samples: &[TrajectorySample],
    model: &RfpcaModel,
    k: usize,
) -> Result<FveReport> {
    if k > model.k_max() {
        return Err(Error::KOutOfRange { k, max: model.k_max() });
    }
    check_model_samples(samples, model)?;
    let n = samples.len() as f64;
    let m = model.m() as f64;
    let mut u0 = 0.0;
    let mut uk = 0.0;
    for (sample, scores) in samples.iter().zip(&model.scores) {
        let (_, recon) = truncate_representation(model, scores, k)?;
        for ((x, mu), y) in sample.points.iter().zip(&model.mean_curve).zip(&recon) {
            u0 += spec.distance(&x.coords, &mu.coords).powi(2) / m;
            uk += spec.distance(&x.coords, &y.coords).powi(2) / m;
        }
    }
    u0 /= n;
    uk /= n;
    if u0 < ZERO_VARIANCE {
        return Err(Error::ZeroVariance);
    }
    Ok(FveReport { u0, uk, fve: (u0 - uk) / u0 })
}

/// Mean squared tangent-space residual `n^{-1} sum_i m^{-1} sum_j |V_i(t_j) - V_iK(t_j)|^2`.
pub fn tangent_residual(model: &RfpcaModel, processes: &[TangentProcess], k: usize) -> Result<f64> {
    if k > model.k_max() {
        return Err(Error::KOutOfRange { k, max: model.k_max() });
    }
    let d0 = model.spec.ambient_dim();
    let m = model.m();
    let mut total = 0.0;
    for (p, scores) in processes.iter().zip(&model.scores) {
        let approx = combine(&model.eigenfunctions, scores, k, m, d0);
        for (v, w) in p.vectors.iter().zip(&approx) {
            total += v.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m as f64;
        }
    }
    Ok(total / processes.len() as f64)
}

/// Smallest `K` whose FVE reaches `gamma`; `k_max` with a warning if none does.
pub fn select_num_components(model: &RfpcaModel, gamma: f64) -> Result<Selection> {
    select_from_fve(&model.fve, gamma)
}

pub fn select_from_fve(fve: &[f64], gamma: f64) -> Result<Selection> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    if fve.is_empty() {
        return Err(Error::KOutOfRange { k: 0, max: 0 });
    }
    if let Some(pos) = fve.iter().position(|&f| f >= gamma) {
        return Ok(Selection { k: pos + 1, warning: None });
    }
    let best_fve = fve.iter().copied().filter(|f| f.is_finite()).fold(f64::NAN, f64::max);
    Ok(Selection { k: fve.len(), warning: Some(FitWarning::InsufficientComponents { gamma, best_fve }) })
}

/// Mode of variation `exp_{mu(t)}(scale * sqrt(lambda_k) * phi_k(t))`, `k` one-based.
pub fn mode_of_variation(model: &RfpcaModel, k: usize, scale: f64) -> Result<Vec<Point>> {
    if k == 0 || k > model.k_max() {
        return Err(Error::KOutOfRange { k, max: model.k_max() });
    }
    let coef = scale * model.eigenvalues[k - 1].sqrt();
    Ok(model.eigenfunctions[k - 1]
        .iter()
        .zip(&model.mean_curve)
        .map(|(phi, mu)| {
            let v: Vec<f64> = phi.iter().map(|x| coef * x).collect();
            Point::new(model.spec.exp(&mu.coords, &v))
        })
        .collect())
}
