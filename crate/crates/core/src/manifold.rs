//! Closed-form geometry of the unit sphere `S^d` and the rotation group SO(3).
//!
//! Points are stored in ambient coordinates: unit vectors in `R^{d+1}` for the
//! sphere and row-major flattened 3x3 rotation matrices for SO(3). Tangent
//! vectors at a rotation `p` are skew-symmetric matrices `v` acting by
//! `exp_p(v) = Exp(v) p`, so the flattened Euclidean inner product is exactly
//! the trace metric `tr(u^T v)` and one FPCA pipeline serves both manifolds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log_map` on the sphere fails when `<p, q> <= -1 + ANTIPODAL_TOLERANCE`.
pub const ANTIPODAL_TOLERANCE: f64 = 1e-10;
/// SO(3) `log_map` fails when the relative rotation angle exceeds `PI - CUT_LOCUS_TOLERANCE`.
pub const CUT_LOCUS_TOLERANCE: f64 = 1e-6;
/// Tolerance on tangency/skewness accepted by [`exp_map`].
pub const TANGENT_TOLERANCE: f64 = 1e-6;

const SMALL_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldKind {
    #[serde(rename = "sphere")]
    Sphere,
    #[serde(rename = "so3")]
    SpecialOrthogonal3,
}

/// Which geometry is active. Fixes the ambient dimension and every map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManifoldSpec {
    kind: ManifoldKind,
    intrinsic_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

impl TangentVector {
    pub fn new(base: Point, coords: Vec<f64>) -> Self {
        TangentVector { base, coords }
    }

    pub fn zero(base: Point) -> Self {
        let coords = vec![0.0; base.coords.len()];
        TangentVector { base, coords }
    }
}

impl ManifoldSpec {
    pub fn sphere(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("sphere dimension must be positive".into()));
        }
        Ok(ManifoldSpec { kind: ManifoldKind::Sphere, intrinsic_dim: d })
    }

    pub const fn so3() -> Self {
        ManifoldSpec { kind: ManifoldKind::SpecialOrthogonal3, intrinsic_dim: 3 }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere => self.intrinsic_dim + 1,
            ManifoldKind::SpecialOrthogonal3 => 9,
        }
    }

    pub fn check_len(&self, coords: &[f64]) -> Result<()> {
        let expected = self.ambient_dim();
        if coords.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: coords.len() });
        }
        Ok(())
    }

    /// A canonical base point: the north pole `e_{d+1}` or the identity rotation.
    pub fn origin(&self) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Sphere => {
                let mut x = vec![0.0; self.ambient_dim()];
                x[self.intrinsic_dim] = 1.0;
                x
            }
            ManifoldKind::SpecialOrthogonal3 => flatten(&Matrix3::identity()),
        }
    }

    /// Geodesic distance on raw coordinates. Lengths are not checked.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => {
                // 2 atan2(|p - q|, |p + q|) equals arccos(<p, q>) on unit vectors but
                // keeps full precision near 0 and pi and is exactly symmetric.
                let mut minus = 0.0;
                let mut plus = 0.0;
                for (a, b) in p.iter().zip(q) {
                    minus += (a - b) * (a - b);
                    plus += (a + b) * (a + b);
                }
                2.0 * minus.sqrt().atan2(plus.sqrt())
            }
            ManifoldKind::SpecialOrthogonal3 => {
                let (angle, _) = relative_rotation_angle(p, q);
                angle * std::f64::consts::SQRT_2
            }
        }
    }

    /// Metric norm of a tangent vector (Euclidean for the sphere, Frobenius for SO(3)).
    pub fn norm(&self, v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Exponential map on raw coordinates. The zero vector maps to `p` exactly.
    pub fn exp(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Sphere => {
                let r = self.norm(v);
                if r == 0.0 {
                    return p.to_vec();
                }
                let (s, c) = r.sin_cos();
                let scale = s / r;
                p.iter().zip(v).map(|(pi, vi)| c * pi + scale * vi).collect()
            }
            ManifoldKind::SpecialOrthogonal3 => {
                if v.iter().all(|&x| x == 0.0) {
                    return p.to_vec();
                }
                let rot = so3_exp(&unflatten(v));
                flatten(&(rot * unflatten(p)))
            }
        }
    }

    /// Logarithm map on raw coordinates.
    pub fn log(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ManifoldKind::Sphere => {
                let inner: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
                if inner <= -1.0 + ANTIPODAL_TOLERANCE {
                    return Err(Error::LogUndefined {
                        reason: format!("points are antipodal (inner product {inner:.17})"),
                    });
                }
                let u: Vec<f64> = q.iter().zip(p).map(|(qi, pi)| qi - inner * pi).collect();
                let nu = self.norm(&u);
                if nu == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                let theta = self.distance(p, q);
                let scale = theta / nu;
                Ok(u.into_iter().map(|x| x * scale).collect())
            }
            ManifoldKind::SpecialOrthogonal3 => {
                let rel = unflatten(q) * unflatten(p).transpose();
                Ok(flatten(&so3_log(&rel)?))
            }
        }
    }

    /// Distance of `coords` from satisfying the point invariant.
    pub fn point_deviation(&self, coords: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => (self.norm(coords) - 1.0).abs(),
            ManifoldKind::SpecialOrthogonal3 => {
                let r = unflatten(coords);
                let gram = r.transpose() * r - Matrix3::identity();
                gram.amax().max((r.determinant() - 1.0).abs())
            }
        }
    }

    /// Distance of `v` from the tangent space at `p`.
    pub fn tangent_deviation(&self, p: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs(),
            ManifoldKind::SpecialOrthogonal3 => {
                let w = unflatten(v);
                (w + w.transpose()).amax()
            }
        }
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at `p`.
    pub fn project_tangent(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Sphere => {
                let inner: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
                v.iter().zip(p).map(|(vi, pi)| vi - inner * pi).collect()
            }
            ManifoldKind::SpecialOrthogonal3 => {
                let w = unflatten(v);
                flatten(&((w - w.transpose()) * 0.5))
            }
        }
    }

    /// Orthonormal basis of the tangent space at `p`, as ambient vectors.
    /// Sphere: the first `d` columns of the Householder reflection taking
    /// `e_{d+1}` to `p`. SO(3): `iota(e_a) / sqrt(2)`, independent of `p`.
    pub fn tangent_basis(&self, p: &[f64]) -> Vec<Vec<f64>> {
        match self.kind {
            ManifoldKind::Sphere => {
                let d = self.intrinsic_dim;
                let mut w = p.to_vec();
                w[d] -= 1.0;
                let w_sq: f64 = w.iter().map(|x| x * x).sum();
                (0..d)
                    .map(|a| {
                        let mut e = vec![0.0; d + 1];
                        e[a] = 1.0;
                        if w_sq > 0.0 {
                            let scale = 2.0 * w[a] / w_sq;
                            e.iter_mut().zip(&w).for_each(|(x, wi)| *x -= scale * wi);
                        }
                        e
                    })
                    .collect()
            }
            ManifoldKind::SpecialOrthogonal3 => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [(s, 0.0, 0.0), (0.0, s, 0.0), (0.0, 0.0, s)]
                    .iter()
                    .map(|&(a, b, c)| flatten(&iota_embed(a, b, c)))
                    .collect()
            }
        }
    }

    /// Nearest manifold point to an ambient vector.
    pub fn project(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.check_len(raw)?;
        match self.kind {
            ManifoldKind::Sphere => {
                let r = self.norm(raw);
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::DegenerateInput("cannot normalize a zero vector".into()));
                }
                Ok(raw.iter().map(|x| x / r).collect())
            }
            ManifoldKind::SpecialOrthogonal3 => Ok(flatten(&nearest_rotation(&unflatten(raw))?)),
        }
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ManifoldKind::Sphere => write!(f, "sphere:{}", self.intrinsic_dim),
            ManifoldKind::SpecialOrthogonal3 => write!(f, "so3"),
        }
    }
}

impl FromStr for ManifoldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("so3") {
            return Ok(ManifoldSpec::so3());
        }
        if let Some(d) = s.strip_prefix("sphere:") {
            let d: usize = d.parse().map_err(|_| Error::InvalidConfig(format!("bad sphere dimension in {s:?}")))?;
            return ManifoldSpec::sphere(d);
        }
        Err(Error::InvalidConfig(format!("unknown manifold {s:?}; expected sphere:<d> or so3")))
    }
}

pub fn geodesic_distance(spec: &ManifoldSpec, p: &Point, q: &Point) -> Result<f64> {
    spec.check_len(&p.coords)?;
    spec.check_len(&q.coords)?;
    Ok(spec.distance(&p.coords, &q.coords))
}

pub fn exp_map(spec: &ManifoldSpec, v: &TangentVector) -> Result<Point> {
    spec.check_len(&v.base.coords)?;
    spec.check_len(&v.coords)?;
    let deviation = spec.tangent_deviation(&v.base.coords, &v.coords);
    if deviation > TANGENT_TOLERANCE {
        return Err(Error::InvalidTangent { deviation });
    }
    Ok(Point::new(spec.exp(&v.base.coords, &v.coords)))
}

pub fn log_map(spec: &ManifoldSpec, p: &Point, q: &Point) -> Result<TangentVector> {
    spec.check_len(&p.coords)?;
    spec.check_len(&q.coords)?;
    let coords = spec.log(&p.coords, &q.coords)?;
    Ok(TangentVector { base: p.clone(), coords })
}

pub fn project_to_manifold(spec: &ManifoldSpec, raw: &[f64]) -> Result<Point> {
    spec.project(raw).map(Point::new)
}

/// Minimal rotation of `R^{d+1}` taking unit vector `a` to unit vector `b`.
///
/// Acts as the identity on the orthogonal complement of `span{a, b}`:
/// `R = I + K + K^2 / (1 + <a, b>)` with `K = b a^T - a b^T`.
pub fn rotation_between(a: &[f64], b: &[f64]) -> Result<DMatrix<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    let n = a.len();
    let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    if c <= -1.0 + ANTIPODAL_TOLERANCE {
        return Err(Error::AntipodalPair);
    }
    let k = DMatrix::from_fn(n, n, |i, j| b[i] * a[j] - a[i] * b[j]);
    let k2 = &k * &k;
    Ok(DMatrix::identity(n, n) + &k + k2 / (1.0 + c))
}

/// `iota(a, b, c) = [0, -a, -b; a, 0, -c; b, c, 0]`.
pub fn iota_embed(a: f64, b: f64, c: f64) -> Matrix3<f64> {
    Matrix3::new(0.0, -a, -b, a, 0.0, -c, b, c, 0.0)
}

pub fn iota_extract(m: &Matrix3<f64>) -> Result<(f64, f64, f64)> {
    let deviation = (m + m.transpose()).amax();
    if deviation > 1e-9 {
        return Err(Error::NotSkew { deviation });
    }
    Ok((m[(1, 0)], m[(2, 0)], m[(2, 1)]))
}

pub fn flatten(m: &Matrix3<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn unflatten(v: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&v[..9])
}

/// Axis vector `w` of a skew matrix, `hat(w) x = w x x`.
fn vee(w: &Matrix3<f64>) -> [f64; 3] {
    [w[(2, 1)], w[(0, 2)], w[(1, 0)]]
}

fn hat(w: [f64; 3]) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

/// Rodrigues formula with a second-order Taylor fallback for tiny angles.
pub fn so3_exp(skew: &Matrix3<f64>) -> Matrix3<f64> {
    let w = vee(skew);
    let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let s2 = skew * skew;
    if theta < SMALL_ANGLE {
        return Matrix3::identity() + skew + s2 * 0.5;
    }
    let (s, c) = theta.sin_cos();
    Matrix3::identity() + skew * (s / theta) + s2 * ((1.0 - c) / (theta * theta))
}

/// Principal matrix logarithm of a rotation, as a skew matrix.
pub fn so3_log(rot: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let skew_part = (rot - rot.transpose()) * 0.5;
    let w = vee(&skew_part);
    let sin_theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let cos_theta = (rot.trace() - 1.0) * 0.5;
    let theta = sin_theta.atan2(cos_theta);
    if theta > PI - CUT_LOCUS_TOLERANCE {
        return Err(Error::LogUndefined { reason: format!("rotation angle {theta:.17} is at the cut locus") });
    }
    if theta < SMALL_ANGLE {
        return Ok(skew_part);
    }
    if cos_theta > -0.5 {
        return Ok(skew_part * (theta / sin_theta));
    }
    // Near pi the skew part loses precision; read the axis off the symmetric part,
    // (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) n n^T.
    let b = (rot + rot.transpose()) * 0.5 - Matrix3::identity() * cos_theta;
    let one_minus_cos = 1.0 - cos_theta;
    let i = (0..3).max_by(|&x, &y| b[(x, x)].total_cmp(&b[(y, y)])).unwrap_or(0);
    let denom = (b[(i, i)] * one_minus_cos).sqrt();
    let mut axis = [b[(0, i)] / denom, b[(1, i)] / denom, b[(2, i)] / denom];
    let dot = axis[0] * w[0] + axis[1] * w[1] + axis[2] * w[2];
    if dot < 0.0 {
        axis = [-axis[0], -axis[1], -axis[2]];
    }
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    Ok(hat([axis[0] / norm * theta, axis[1] / norm * theta, axis[2] / norm * theta]))
}

/// Rotation angle of `q p^T`, computed without forming the product so that
/// swapping `p` and `q` is exact. Also returns the skew axis `vee`.
fn relative_rotation_angle(p: &[f64], q: &[f64]) -> (f64, [f64; 3]) {
    // (q p^T)_{ij} = sum_k q_{ik} p_{jk}
    let entry = |i: usize, j: usize| -> f64 { (0..3).map(|k| q[3 * i + k] * p[3 * j + k]).sum::<f64>() };
    let entry_t = |i: usize, j: usize| -> f64 { (0..3).map(|k| p[3 * j + k] * q[3 * i + k]).sum::<f64>() };
    let trace = entry(0, 0) + entry(1, 1) + entry(2, 2);
    let w =
        [0.5 * (entry(2, 1) - entry_t(1, 2)), 0.5 * (entry(0, 2) - entry_t(2, 0)), 0.5 * (entry(1, 0) - entry_t(0, 1))];
    let sin_theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    (sin_theta.atan2((trace - 1.0) * 0.5), w)
}

/// Nearest rotation via the polar iteration `X <- (X + X^{-T}) / 2`.
fn nearest_rotation(raw: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let det = raw.determinant();
    let scale = raw.amax();
    if !det.is_finite() || scale == 0.0 || det.abs() < 1e-12 * scale.powi(3) {
        return Err(Error::DegenerateInput("matrix is singular".into()));
    }
    if det < 0.0 {
        // The polar factor would be a reflection; take U diag(1, 1, -1) V^T instead.
        let svd = raw.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut d = Matrix3::identity();
        if (u * v_t).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        return Ok(u * d * v_t);
    }
    let mut x = *raw;
    for _ in 0..100 {
        let inv_t = x.try_inverse().ok_or_else(|| Error::DegenerateInput("matrix is singular".into()))?.transpose();
        let next = (x + inv_t) * 0.5;
        let change = (next - x).amax();
        x = next;
        if change < 1e-12 {
            break;
        }
    }
    Ok(x)
}
