//! Longitudinal compositional data: count smoothing, normalization to the
//! simplex, and the square-root map onto the nonnegative orthant of `S^{J-1}`.

use crate::error::{Error, Result};
use crate::manifold::Point;
use crate::trajectory::TrajectorySample;

/// Tolerance for coordinates slightly below zero after reconstruction.
pub const ORTHANT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CountPanel {
    pub subject_id: String,
    pub times: Vec<f64>,
    /// `counts[row][category]`.
    pub counts: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionCurve {
    pub subject_id: String,
    pub times: Vec<f64>,
    pub proportions: Vec<Vec<f64>>,
}

impl CountPanel {
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.counts.len() {
            return Err(Error::DimensionMismatch { expected: self.times.len(), actual: self.counts.len() });
        }
        let j = self.counts.first().map_or(0, |r| r.len());
        for (row, values) in self.counts.iter().enumerate() {
            if values.len() != j {
                return Err(Error::DimensionMismatch { expected: j, actual: values.len() });
            }
            if let Some(col) = values.iter().position(|&c| !(c >= 0.0)) {
                return Err(Error::NegativeCoordinate { row, column: col, value: values[col] });
            }
        }
        Ok(())
    }
}

pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Component-wise Nadaraya-Watson smoothing with the Epanechnikov kernel.
/// Weights renormalize over the in-window observations; nothing is reflected
/// at the boundaries.
pub fn smooth_counts(panel: &CountPanel, bandwidth: f64, eval_grid: &[f64]) -> Result<CountPanel> {
    panel.validate()?;
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let lo = panel.times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = panel.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let j = panel.counts.first().map_or(0, |r| r.len());
    let mut counts = Vec::with_capacity(eval_grid.len());
    for &t in eval_grid {
        if t < lo || t > hi {
            return Err(Error::InvalidConfig(format!("evaluation time {t} outside [{lo}, {hi}]")));
        }
        let mut row = vec![0.0; j];
        let mut total = 0.0;
        for (ti, ci) in panel.times.iter().zip(&panel.counts) {
            let w = epanechnikov((t - ti) / bandwidth);
            if w > 0.0 {
                total += w;
                row.iter_mut().zip(ci).for_each(|(r, c)| *r += w * c);
            }
        }
        if total == 0.0 {
            return Err(Error::EmptyKernelWindow { t });
        }
        row.iter_mut().for_each(|r| *r /= total);
        counts.push(row);
    }
    Ok(CountPanel { subject_id: panel.subject_id.clone(), times: eval_grid.to_vec(), counts })
}

pub fn to_proportions(panel: &CountPanel) -> Result<CompositionCurve> {
    panel.validate()?;
    let proportions = panel
        .counts
        .iter()
        .enumerate()
        .map(|(row, c)| {
            let sum: f64 = c.iter().sum();
            if !(sum > 0.0) {
                return Err(Error::ZeroRowSum { row });
            }
            Ok(c.iter().map(|x| x / sum).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(CompositionCurve { subject_id: panel.subject_id.clone(), times: panel.times.clone(), proportions })
}

/// Componentwise square root. The times are rescaled affinely onto `[0, 1]`
/// and must be uniformly spaced.
pub fn sqrt_embed(comp: &CompositionCurve) -> Result<TrajectorySample> {
    let m = comp.times.len();
    if m < 2 {
        return Err(Error::GridMismatch(format!("subject {}: need at least 2 times", comp.subject_id)));
    }
    let (t0, t1) = (comp.times[0], comp.times[m - 1]);
    if !(t1 > t0) {
        return Err(Error::GridMismatch(format!("subject {}: times must increase", comp.subject_id)));
    }
    let grid = comp.times.iter().map(|t| (t - t0) / (t1 - t0)).collect();
    let mut points = Vec::with_capacity(m);
    for (row, y) in comp.proportions.iter().enumerate() {
        if let Some(column) = y.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::NegativeCoordinate { row, column, value: y[column] });
        }
        points.push(Point::new(y.iter().map(|v| v.sqrt()).collect()));
    }
    TrajectorySample::new(comp.subject_id.clone(), grid, points)
}

/// Componentwise square of points on the nonnegative orthant.
pub fn sphere_to_composition(sample: &TrajectorySample) -> Result<CompositionCurve> {
    let (comp, flags) = composition_with_flags(sample);
    if let Some(row) = flags.iter().position(|&f| f) {
        let (column, value) = sample.points[row]
            .coords
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::NAN));
        return Err(Error::NegativeCoordinate { row, column, value });
    }
    Ok(comp)
}

/// Like [`sphere_to_composition`], but points that left the orthant are
/// clamped and flagged instead of rejected.
pub fn composition_with_flags(sample: &TrajectorySample) -> (CompositionCurve, Vec<bool>) {
    let mut flags = Vec::with_capacity(sample.points.len());
    let proportions = sample
        .points
        .iter()
        .map(|p| {
            flags.push(p.coords.iter().any(|&x| x < -ORTHANT_TOLERANCE));
            let sq: Vec<f64> = p.coords.iter().map(|&x| if x < 0.0 { 0.0 } else { x * x }).collect();
            let sum: f64 = sq.iter().sum();
            if sum > 0.0 {
                sq.iter().map(|x| x / sum).collect()
            } else {
                sq
            }
        })
        .collect();
    let comp = CompositionCurve { subject_id: sample.subject_id.clone(), times: sample.grid.clone(), proportions };
    (comp, flags)
}
