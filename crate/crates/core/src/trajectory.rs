//! Sampled trajectories and their tangent-space representations.

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point};

const GRID_TOLERANCE: f64 = 1e-9;

/// One subject's curve observed on the uniform grid `t_j = j / (m - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub subject_id: String,
    pub grid: Vec<f64>,
    pub points: Vec<Point>,
}

/// Log-mapped curve `V_i(t_j)` in ambient coordinates at the mean curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentProcess {
    pub subject_id: String,
    pub grid: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn uniform_grid(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.0];
    }
    (0..m).map(|j| j as f64 / (m - 1) as f64).collect()
}

impl TrajectorySample {
    pub fn new(subject_id: impl Into<String>, grid: Vec<f64>, points: Vec<Point>) -> Result<Self> {
        let sample = TrajectorySample { subject_id: subject_id.into(), grid, points };
        sample.validate_grid()?;
        Ok(sample)
    }

    /// Builds a sample on the canonical uniform grid.
    pub fn on_uniform_grid(subject_id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let grid = uniform_grid(points.len());
        Self::new(subject_id, grid, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn validate_grid(&self) -> Result<()> {
        let m = self.grid.len();
        if m < 2 {
            return Err(Error::GridMismatch(format!(
                "subject {}: grid needs at least 2 points, got {m}",
                self.subject_id
            )));
        }
        if self.points.len() != m {
            return Err(Error::GridMismatch(format!(
                "subject {}: {} points for a grid of {m} times",
                self.subject_id,
                self.points.len()
            )));
        }
        for (j, &t) in self.grid.iter().enumerate() {
            let expected = j as f64 / (m - 1) as f64;
            if (t - expected).abs() > GRID_TOLERANCE {
                return Err(Error::GridMismatch(format!(
                    "subject {}: grid is not uniform on [0, 1] (t[{j}] = {t}, expected {expected})",
                    self.subject_id
                )));
            }
        }
        Ok(())
    }

    pub fn check_manifold(&self, spec: &ManifoldSpec) -> Result<()> {
        for p in &self.points {
            spec.check_len(&p.coords)?;
        }
        Ok(())
    }
}

/// Checks that all samples share one grid and returns it.
pub fn shared_grid(samples: &[TrajectorySample]) -> Result<&[f64]> {
    let first = samples.first().ok_or_else(|| Error::InvalidConfig("at least one sample is required".into()))?;
    for s in &samples[1..] {
        let same = s.grid.len() == first.grid.len()
            && s.grid.iter().zip(&first.grid).all(|(a, b)| (a - b).abs() <= GRID_TOLERANCE);
        if !same {
            return Err(Error::GridMismatch(format!(
                "subject {} has grid {:?} but subject {} has grid {:?}",
                first.subject_id, first.grid, s.subject_id, s.grid
            )));
        }
    }
    Ok(&first.grid)
}
