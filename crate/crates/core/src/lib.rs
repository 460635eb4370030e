//! Global prior-sensitivity analysis for Bayesian nonparametric density
//! estimation under the Fisher-Rao geometry of square-root densities.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: densities on a uniform grid of `[0, 1]`, their square-root
//!   representation on the unit Hilbert sphere, exponential and log maps,
//!   geodesics, the Karcher mean and tangent PCA.
//! * [`samplers`]: posterior density draws from the DP, DPGMM, CCV and DCV
//!   models.
//! * [`sensitivity`]: the shift, spread and covariance-shape measures
//!   comparing a baseline posterior sample with a perturbed one.
//! * [`sweep`]: one-parameter perturbation sweeps with replicate bands.
//! * [`io`]: dataset files, experiment configs and result archives.

pub mod geometry;
pub mod io;
pub mod samplers;
pub mod seed;
pub mod sensitivity;
pub mod sweep;

pub use geometry::{
    fr_distance, karcher_mean, karcher_variance, normalize_pdf, tangent_pca, GeometryError, Grid,
    GridPdf, KarcherMean, KarcherOptions, Srd, TangentVector, TpcaResult,
};
pub use samplers::{
    ccv_posterior, dcv_posterior, dp_posterior, dpgmm_posterior, BaseMeasure, CcvConfig, Dataset,
    DcvConfig, DpConfig, DpgmmConfig, McmcControl, ModelConfig, ModelKind, PosteriorSample,
    SamplerError,
};
pub use sensitivity::{
    e_upper_bound, measure_d, measure_e, measure_v, replicate_band, MeasureTriple, SampleSummary,
    SensitivityError,
};
pub use sweep::{run_sweep, sweep_grid_presets, SweepError, SweepResult, SweepSpec};
