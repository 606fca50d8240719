//! Synthetic trajectory generators on `S^d` and SO(3).
//!
//! Curves are `X(t) = exp_{mu(t)}(sum_k xi_k phi_k(t))` with independent
//! Gaussian scores of variance `decay_base^{k/2}`, a closed-form mean curve and
//! eigenfunctions assembled from orthonormal shifted Legendre polynomials
//! evaluated at dilated and shifted times.
//!
//! On `S^d` the mean is `exp_{p0}(a t, ..., a t, 0.3 pi sin(pi t), 0)` with
//! `a = 2 / sqrt(d - 1)` repeated `d - 1` times and `p0` the north pole;
//! `phi_k(t) = d^{-1/2} R_t [zeta_k(t/d), zeta_k((t+1)/d), ..., zeta_k((t+d-1)/d), 0]`
//! where `R_t` is the minimal rotation from `p0` to `mu(t)`. On SO(3) the mean is
//! `Exp(iota(2t, 0.3 pi sin(pi t), 0))` and
//! `phi_k(t) = 6^{-1/2} iota(zeta_k(t/3), zeta_k((t+1)/3), zeta_k((t+2)/3))`.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::manifold::{flatten, iota_embed, rotation_between, so3_exp, ManifoldKind, ManifoldSpec, Point};
use crate::rng::KeyedRng;
use crate::trajectory::{uniform_grid, TrajectorySample};

pub const MAX_COMPONENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub manifold: ManifoldSpec,
    pub n: usize,
    pub m: usize,
    /// Number of nonzero score components, at most [`MAX_COMPONENTS`].
    pub n_components: usize,
    pub decay_base: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(manifold: ManifoldSpec, n: usize, seed: u64) -> Self {
        SimConfig { manifold, n, m: 20, n_components: MAX_COMPONENTS, decay_base: 0.07, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.m < 2 {
            return Err(Error::InvalidConfig("m must be at least 2".into()));
        }
        if !(self.decay_base > 0.0 && self.decay_base < 1.0) {
            return Err(Error::InvalidConfig("decay_base must lie in (0, 1)".into()));
        }
        if self.n_components == 0 || self.n_components > MAX_COMPONENTS {
            return Err(Error::InvalidConfig(format!("n_components must lie in 1..={MAX_COMPONENTS}")));
        }
        if self.manifold.kind() == ManifoldKind::Sphere && self.manifold.intrinsic_dim() < 2 {
            return Err(Error::InvalidConfig("the sphere generator needs d >= 2".into()));
        }
        Ok(())
    }

    /// Variance of the `k`-th score, `k` one-based.
    pub fn score_variance(&self, k: usize) -> f64 {
        self.decay_base.powf(k as f64 / 2.0)
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub samples: Vec<TrajectorySample>,
    pub mean_curve: Vec<Point>,
    /// `eigenfunctions[k][j]`.
    pub eigenfunctions: Vec<Vec<Vec<f64>>>,
    /// `scores[i][k]`.
    pub scores: Vec<Vec<f64>>,
    /// `tangent_fields[i][j] = sum_k scores[i][k] eigenfunctions[k][j]`.
    pub tangent_fields: Vec<Vec<Vec<f64>>>,
}

/// Orthonormal shifted Legendre polynomial of degree `k` on `[0, 1]`, no range check.
pub(crate) fn shifted_legendre(k: usize, t: f64) -> f64 {
    let x = 2.0 * t - 1.0;
    let (mut p_prev, mut p) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
    (2.0 * k as f64 + 1.0).sqrt() * p
}

/// `zeta_k(t)`: degree-`k` orthonormal shifted Legendre polynomial, `1 <= k <= 20`.
pub fn legendre_basis(k: usize, t: f64) -> Result<f64> {
    if k == 0 || k > MAX_COMPONENTS {
        return Err(Error::KOutOfRange { k, max: MAX_COMPONENTS });
    }
    Ok(shifted_legendre(k, t))
}

fn sphere_mean_tangent(d: usize, t: f64) -> Vec<f64> {
    let a = 2.0 / ((d - 1) as f64).sqrt() * t;
    let mut v = vec![a; d - 1];
    v.push(0.3 * PI * (PI * t).sin());
    v.push(0.0);
    v
}

pub fn gen_mean_curve(config: &SimConfig) -> Result<Vec<Point>> {
    config.validate()?;
    let spec = config.manifold;
    Ok(uniform_grid(config.m)
        .into_iter()
        .map(|t| match spec.kind() {
            ManifoldKind::Sphere => {
                let v = sphere_mean_tangent(spec.intrinsic_dim(), t);
                Point::new(spec.exp(&spec.origin(), &v))
            }
            ManifoldKind::SpecialOrthogonal3 => {
                let w = iota_embed(2.0 * t, 0.3 * PI * (PI * t).sin(), 0.0);
                Point::new(flatten(&so3_exp(&w)))
            }
        })
        .collect())
}

fn eigenfunctions_on(config: &SimConfig, mean_curve: &[Point]) -> Result<Vec<Vec<Vec<f64>>>> {
    let spec = config.manifold;
    let grid = uniform_grid(config.m);
    let mut out = vec![Vec::with_capacity(config.m); config.n_components];
    match spec.kind() {
        ManifoldKind::Sphere => {
            let d = spec.intrinsic_dim();
            let origin = spec.origin();
            let scale = 1.0 / (d as f64).sqrt();
            for (t, mu) in grid.iter().zip(mean_curve) {
                let rot = rotation_between(&origin, &mu.coords)?;
                for (k, phi) in out.iter_mut().enumerate() {
                    let mut raw = DVector::zeros(d + 1);
                    for c in 0..d {
                        raw[c] = scale * shifted_legendre(k + 1, (t + c as f64) / d as f64);
                    }
                    phi.push((&rot * raw).iter().copied().collect());
                }
            }
        }
        ManifoldKind::SpecialOrthogonal3 => {
            let scale = 1.0 / 6f64.sqrt();
            for t in &grid {
                for (k, phi) in out.iter_mut().enumerate() {
                    let z = |shift: f64| scale * shifted_legendre(k + 1, (t + shift) / 3.0);
                    phi.push(flatten(&iota_embed(z(0.0), z(1.0), z(2.0))));
                }
            }
        }
    }
    Ok(out)
}

pub fn gen_eigenfunctions(config: &SimConfig) -> Result<Vec<Vec<Vec<f64>>>> {
    let mean = gen_mean_curve(config)?;
    eigenfunctions_on(config, &mean)
}

/// Scores for subject `i`; component `k` draws from key `(seed, i, k)`.
pub fn gen_scores(config: &SimConfig, i: usize) -> Vec<f64> {
    let rng = KeyedRng::new(config.seed);
    (1..=config.n_components)
        .map(|k| config.score_variance(k).sqrt() * rng.standard_normal(i as u64, k as u64))
        .collect()
}

pub fn gen_samples(config: &SimConfig) -> Result<SimulatedData> {
    let mean_curve = gen_mean_curve(config)?;
    let eigenfunctions = eigenfunctions_on(config, &mean_curve)?;
    let spec = config.manifold;
    let d0 = spec.ambient_dim();
    let width = (config.n as f64).log10().floor() as usize + 1;
    let mut samples = Vec::with_capacity(config.n);
    let mut scores = Vec::with_capacity(config.n);
    let mut tangent_fields = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let xi = gen_scores(config, i);
        let field: Vec<Vec<f64>> = (0..config.m)
            .map(|j| {
                let mut v = vec![0.0; d0];
                for (phi, x) in eigenfunctions.iter().zip(&xi) {
                    v.iter_mut().zip(&phi[j]).for_each(|(a, b)| *a += x * b);
                }
                v
            })
            .collect();
        let points = field.iter().zip(&mean_curve).map(|(v, mu)| Point::new(spec.exp(&mu.coords, v))).collect();
        samples.push(TrajectorySample::on_uniform_grid(format!("s{:0width$}", i + 1), points)?);
        scores.push(xi);
        tangent_fields.push(field);
    }
    Ok(SimulatedData { samples, mean_curve, eigenfunctions, scores, tangent_fields })
}

/// Tangent-space FVE implied by the score variances, `K = 1..=n_components`.
pub fn theoretical_fve(config: &SimConfig) -> Vec<f64> {
    let vars: Vec<f64> = (1..=config.n_components).map(|k| config.score_variance(k)).collect();
    let total: f64 = vars.iter().sum();
    vars.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc / total)
        })
        .collect()
}
