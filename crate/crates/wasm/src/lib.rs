//! Browser bindings for the trajectory demo.
//!
//! A [`Demo`] draws synthetic curves on the unit sphere, fits the model and
//! then answers two queries from the page: truncated reconstructions of one
//! subject and modes of variation around the mean. Curves cross the boundary
//! as flat `[x0, y0, z0, x1, y1, z1, ...]` arrays.

use rfpca::rfpca::{mode_of_variation, select_num_components};
use rfpca::{
    fit_rfpca, gen_samples, truncate_representation, FrechetConfig, ManifoldSpec, Point, RfpcaModel, SimConfig,
    TrajectorySample,
};
use wasm_bindgen::prelude::*;

pub const MAX_SUBJECTS: usize = 400;
pub const MAX_COMPONENTS: usize = 10;

fn flatten(points: &[Point]) -> Vec<f64> {
    points.iter().flat_map(|p| p.coords.iter().copied()).collect()
}

#[wasm_bindgen]
pub struct Demo {
    samples: Vec<TrajectorySample>,
    model: RfpcaModel,
    selected: usize,
}

impl Demo {
    pub fn try_new(n: usize, seed: u64, k_max: usize) -> rfpca::Result<Demo> {
        if !(2..=MAX_SUBJECTS).contains(&n) {
            return Err(rfpca::Error::InvalidConfig(format!("n must be between 2 and {MAX_SUBJECTS}")));
        }
        let k_max = k_max.clamp(1, MAX_COMPONENTS);
        let spec = ManifoldSpec::sphere(2)?;
        let data = gen_samples(&SimConfig::new(spec, n, seed))?;
        let model = fit_rfpca(&spec, &data.samples, &FrechetConfig::default(), k_max)?;
        let selected = select_num_components(&model, 0.95)?.k;
        Ok(Demo { samples: data.samples, model, selected })
    }

    pub fn try_reconstruct(&self, subject: usize, k: usize) -> rfpca::Result<Vec<f64>> {
        let scores = self
            .model
            .scores
            .get(subject)
            .ok_or_else(|| rfpca::Error::InvalidConfig(format!("no subject {subject}")))?;
        let (_, points) = truncate_representation(&self.model, scores, k)?;
        Ok(flatten(&points))
    }

    pub fn try_mode(&self, k: usize, scale: f64) -> rfpca::Result<Vec<f64>> {
        Ok(flatten(&mode_of_variation(&self.model, k, scale)?))
    }

    pub fn model(&self) -> &RfpcaModel {
        &self.model
    }
}

fn js(e: rfpca::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    /// Draws `n` curves on the sphere with the given seed and fits up to
    /// `k_max` components.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u64, k_max: usize) -> Result<Demo, JsError> {
        Demo::try_new(n, seed, k_max).map_err(js)
    }

    #[wasm_bindgen(getter)]
    pub fn subjects(&self) -> usize {
        self.samples.len()
    }

    #[wasm_bindgen(getter, js_name = gridSize)]
    pub fn grid_size(&self) -> usize {
        self.model.grid.len()
    }

    #[wasm_bindgen(getter, js_name = kMax)]
    pub fn k_max(&self) -> usize {
        self.model.k_max()
    }

    /// Smallest K whose FVE reaches 0.95.
    #[wasm_bindgen(getter, js_name = selectedK)]
    pub fn selected_k(&self) -> usize {
        self.selected
    }

    /// Cumulative FVE for K = 1..k_max.
    pub fn fve(&self) -> Vec<f64> {
        self.model.fve.clone()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.model.eigenvalues.clone()
    }

    pub fn mean(&self) -> Vec<f64> {
        flatten(&self.model.mean_curve)
    }

    pub fn observed(&self, subject: usize) -> Vec<f64> {
        self.samples.get(subject).map(|s| flatten(&s.points)).unwrap_or_default()
    }

    /// Curve of `subject` rebuilt from its first `k` scores.
    pub fn reconstruct(&self, subject: usize, k: usize) -> Result<Vec<f64>, JsError> {
        self.try_reconstruct(subject, k).map_err(js)
    }

    /// Mean curve pushed `scale` standard deviations along component `k`.
    pub fn mode(&self, k: usize, scale: f64) -> Result<Vec<f64>, JsError> {
        self.try_mode(k, scale).map_err(js)
    }
}
