//! Riemannian functional principal component analysis (RFPCA) for samples of
//! trajectories on the unit sphere `S^d` and the rotation group SO(3).
//!
//! The pipeline is: pointwise Fréchet mean curve ([`frechet`]), log-mapped
//! tangent processes and multivariate FPCA on them ([`rfpca`]), truncated
//! reconstructions mapped back with the exponential map, and geodesic
//! fraction-of-variance-explained. [`baseline`] holds the classical L2 FPCA for
//! comparison, [`compositional`] the square-root front end for longitudinal
//! compositions, and [`simgen`] reproducible synthetic data.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod compositional;
pub mod eigen;
pub mod error;
pub mod fpca;
pub mod frechet;
pub mod geo;
pub mod io;
pub mod manifold;
pub mod rfpca;
pub mod rng;
pub mod simgen;
pub mod trajectory;

pub use baseline::{fit_l2_fpca, geodesic_fve_l2, L2Chart, L2Model};
pub use compositional::{
    smooth_counts, sphere_to_composition, sqrt_embed, to_proportions, CompositionCurve, CountPanel,
};
pub use error::{Error, ErrorClass, Result};
pub use frechet::{frechet_mean_curve, frechet_mean_point, FrechetConfig};
pub use geo::lonlat_to_s2;
pub use manifold::{
    exp_map, geodesic_distance, iota_embed, iota_extract, log_map, project_to_manifold, rotation_between, ManifoldKind,
    ManifoldSpec, Point, TangentVector,
};
pub use rfpca::{
    compute_fve, compute_log_processes, fit_rfpca, select_num_components, truncate_representation, FitWarning,
    FveReport, RfpcaModel, Selection,
};
pub use simgen::{gen_eigenfunctions, gen_mean_curve, gen_samples, legendre_basis, SimConfig, SimulatedData};
pub use trajectory::{TangentProcess, TrajectorySample};
