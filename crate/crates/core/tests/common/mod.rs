#![allow(dead_code)]

use rfpca::manifold::{flatten, iota_embed};
use rfpca::rng::KeyedRng;
use rfpca::{ManifoldSpec, Point, TrajectorySample};

/// Sequential draws from a keyed stream.
pub struct Draws {
    rng: KeyedRng,
    stream: u64,
    next: u64,
}

impl Draws {
    pub fn new(seed: u64) -> Self {
        Draws { rng: KeyedRng::new(seed), stream: 0, next: 0 }
    }

    pub fn uniform(&mut self) -> f64 {
        self.next += 1;
        self.rng.uniform(self.stream, self.next)
    }

    pub fn normal(&mut self) -> f64 {
        self.next += 1;
        self.rng.standard_normal(self.stream, self.next)
    }

    pub fn normals(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    /// Uniformly distributed point on the manifold (SO(3) angles kept below `pi - 0.05`).
    pub fn point(&mut self, spec: &ManifoldSpec) -> Vec<f64> {
        match spec.kind() {
            rfpca::ManifoldKind::Sphere => {
                let v = self.normals(spec.ambient_dim());
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| x / r).collect()
            }
            rfpca::ManifoldKind::SpecialOrthogonal3 => {
                let axis = self.normals(3);
                let r = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
                let angle = (std::f64::consts::PI - 0.05) * self.uniform();
                let w: Vec<f64> = axis.iter().map(|x| x / r * angle).collect();
                flatten(&rfpca::manifold::so3_exp(&iota_embed(w[0], w[1], w[2])))
            }
        }
    }

    /// Tangent vector at `p` with intrinsic norm `radius`.
    pub fn tangent(&mut self, spec: &ManifoldSpec, p: &[f64], radius: f64) -> Vec<f64> {
        let raw = match spec.kind() {
            rfpca::ManifoldKind::Sphere => self.normals(spec.ambient_dim()),
            rfpca::ManifoldKind::SpecialOrthogonal3 => {
                let w = self.normals(3);
                flatten(&iota_embed(w[0], w[1], w[2]))
            }
        };
        let v = spec.project_tangent(p, &raw);
        let norm = spec.norm(&v);
        v.iter().map(|x| x * radius / norm).collect()
    }

    /// Point at geodesic distance `radius * u` from `p`, `u` uniform.
    pub fn near(&mut self, spec: &ManifoldSpec, p: &[f64], radius: f64) -> Vec<f64> {
        let r = radius * self.uniform();
        let v = self.tangent(spec, p, r);
        spec.exp(p, &v)
    }
}

pub fn curve_sample(id: &str, points: Vec<Vec<f64>>) -> TrajectorySample {
    TrajectorySample::on_uniform_grid(id, points.into_iter().map(Point::new).collect()).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Discrete inner product `m^{-1} sum_j <f(t_j), g(t_j)>`.
pub fn curve_inner(f: &[Vec<f64>], g: &[Vec<f64>]) -> f64 {
    f.iter().zip(g).map(|(a, b)| dot(a, b)).sum::<f64>() / f.len() as f64
}

pub fn s2() -> ManifoldSpec {
    ManifoldSpec::sphere(2).unwrap()
}

pub fn so3() -> ManifoldSpec {
    ManifoldSpec::so3()
}
