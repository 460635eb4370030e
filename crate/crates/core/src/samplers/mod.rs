//! Posterior density samplers for four Dirichlet-type models.
//!
//! * DP: conjugate posterior drawn by truncated stick breaking, smoothed with
//!   a Gaussian kernel.
//! * DPGMM: collapsed Gibbs sampler over CRP assignments with a Normal-Gamma
//!   base measure.
//! * CCV: common component variance hierarchy, conjugate Gibbs sampler.
//! * DCV: different component variances, auxiliary-component sampler for the
//!   non-conjugate assignment step.
//!
//! Every sampler owns its RNG stream, seeded from [`McmcControl::seed`], so a
//! run is a pure function of `(data, config, control, grid)`.

mod ccv;
mod crp;
mod dataset;
mod dcv;
mod dp;
mod dpgmm;
mod hyper;
mod math;

use thiserror::Error;

use crate::geometry::{GeometryError, Grid, GridPdf};

pub use ccv::ccv_posterior;
pub use crp::crp_prior_cluster_counts;
pub use dataset::{Dataset, Rescale, Transform, MARGIN};
pub use dcv::{dcv_posterior, draw_inverse_zeta};
pub use dp::{dp_posterior, silverman_bandwidth};
pub use dpgmm::dpgmm_posterior;
pub use hyper::griffin_steel_density;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("observation {0} is not finite")]
    NonFiniteObservation(usize),
    #[error("observation {index} = {value} is not positive; cannot take its log")]
    NonPositiveForLog { index: usize, value: f64 },
    #[error("observation {index} = {value} lies outside [0, 1]")]
    OutsideUnitInterval { index: usize, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("phi must exceed 1, got {0}")]
    InvalidPhi(f64),
    #[error("invalid MCMC control: {0}")]
    InvalidControl(String),
    #[error("stick-breaking residual mass {residual} exceeds 1e-6 after {sticks} sticks")]
    TruncationTooSmall { residual: f64, sticks: usize },
    #[error("unknown parameter `{parameter}` for model {model}")]
    UnknownParameter { model: ModelKind, parameter: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Dp,
    Dpgmm,
    Ccv,
    Dcv,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Dp,
        ModelKind::Dpgmm,
        ModelKind::Ccv,
        ModelKind::Dcv,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::Dp => "dp",
            ModelKind::Dpgmm => "dpgmm",
            ModelKind::Ccv => "ccv",
            ModelKind::Dcv => "dcv",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Centering measure of the DP on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaseMeasure {
    Uniform,
    Beta { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    /// `1.06 * sd * n^(-1/5)` of the unit-scale data, at least two grid
    /// spacings.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpConfig {
    pub alpha: f64,
    pub g0: BaseMeasure,
    /// Minimum number of sticks; more are broken until the residual mass is
    /// at most `1e-6`.
    pub truncation: usize,
    pub bandwidth: Bandwidth,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            g0: BaseMeasure::Uniform,
            truncation: 200,
            bandwidth: Bandwidth::Auto,
        }
    }
}

/// Univariate conjugate DPGMM. The component precision has prior
/// `Gamma(shape nu/2, rate nu*s/2)` and the component mean `N(m, 1/(r R))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DpgmmConfig {
    pub alpha: f64,
    pub m: f64,
    pub r: f64,
    pub nu: f64,
    pub s: f64,
}

impl Default for DpgmmConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            m: 0.0,
            r: 1.0 / 9.0,
            nu: 5.0,
            s: 1.0,
        }
    }
}

/// Common component variance model. `sigma^-2 ~ Gamma(shape s0, rate s1)`,
/// `a ~ Beta(a0, a1)`, `mu0 ~ N(mu00, 1/lambda0)` and `alpha` follows the
/// Griffin-Steel prior with `(eta, gamma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CcvConfig {
    pub a0: f64,
    pub a1: f64,
    pub mu00: f64,
    pub lambda0: f64,
    pub s0: f64,
    pub s1: f64,
    pub eta: f64,
    pub gamma: f64,
    /// Holds `a` at this value instead of sampling it.
    pub fixed_a: Option<f64>,
}

impl CcvConfig {
    /// Baseline `a0 = 1, a1 = 10, eta = 3, gamma = 5` with location and scale
    /// hyperparameters centred on the data.
    pub fn baseline_for(data: &Dataset) -> Self {
        let var = data_scale(data);
        Self {
            a0: 1.0,
            a1: 10.0,
            mu00: data.mean(),
            lambda0: 1.0 / var,
            s0: 2.0,
            s1: 2.0 * var,
            eta: 3.0,
            gamma: 5.0,
            fixed_a: None,
        }
    }
}

fn data_scale(data: &Dataset) -> f64 {
    let v = data.variance();
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcvConfig {
    pub ccv: CcvConfig,
    /// Shape of the `Gamma(phi, 1)` prior on `zeta^-1`.
    pub phi: f64,
    /// Auxiliary components per assignment update.
    pub aux_m: usize,
}

impl DcvConfig {
    pub fn baseline_for(data: &Dataset) -> Self {
        Self {
            ccv: CcvConfig::baseline_for(data),
            phi: 2.0,
            aux_m: 3,
        }
    }
}

/// Chain length and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McmcControl {
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for McmcControl {
    fn default() -> Self {
        Self {
            n_samples: 500,
            burn_in: 1000,
            thin: 5,
            seed: 0,
        }
    }
}

impl McmcControl {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n_samples < 10 {
            return Err(SamplerError::InvalidControl(format!(
                "n_samples must be at least 10, got {}",
                self.n_samples
            )));
        }
        if self.thin < 1 {
            return Err(SamplerError::InvalidControl(
                "thin must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Total sweeps, and whether sweep `s` (zero based) is retained.
    pub(crate) fn total_sweeps(&self) -> usize {
        self.burn_in + self.n_samples * self.thin
    }

    pub(crate) fn keeps(&self, sweep: usize) -> bool {
        sweep >= self.burn_in && (sweep - self.burn_in + 1).is_multiple_of(self.thin)
    }
}

/// Any of the four model configurations.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelConfig {
    Dp(DpConfig),
    Dpgmm(DpgmmConfig),
    Ccv(CcvConfig),
    Dcv(DcvConfig),
}

fn positive(name: &str, v: f64) -> Result<(), SamplerError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SamplerError::InvalidConfig(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<(), SamplerError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SamplerError::InvalidConfig(format!(
            "{name} must be finite"
        )))
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        positive("alpha", self.alpha)?;
        if self.truncation < 50 {
            return Err(SamplerError::InvalidConfig(format!(
                "truncation must be at least 50, got {}",
                self.truncation
            )));
        }
        if let BaseMeasure::Beta { a, b } = self.g0 {
            positive("g0_a", a)?;
            positive("g0_b", b)?;
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            positive("bandwidth", h)?;
        }
        Ok(())
    }
}

impl DpgmmConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        positive("alpha", self.alpha)?;
        finite("m", self.m)?;
        positive("r", self.r)?;
        positive("s", self.s)?;
        if !(self.nu.is_finite() && self.nu >= 1.0) {
            return Err(SamplerError::InvalidConfig(format!(
                "nu must be at least 1, got {}",
                self.nu
            )));
        }
        Ok(())
    }
}

impl CcvConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        positive("a0", self.a0)?;
        positive("a1", self.a1)?;
        finite("mu00", self.mu00)?;
        positive("lambda0", self.lambda0)?;
        positive("s0", self.s0)?;
        positive("s1", self.s1)?;
        positive("eta", self.eta)?;
        positive("gamma", self.gamma)?;
        if let Some(a) = self.fixed_a {
            if !(a > 0.0 && a < 1.0) {
                return Err(SamplerError::InvalidConfig(format!(
                    "fixed a must lie in (0, 1), got {a}"
                )));
            }
        }
        Ok(())
    }
}

impl DcvConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        self.ccv.validate()?;
        if !(self.phi.is_finite() && self.phi > 1.0) {
            return Err(SamplerError::InvalidPhi(self.phi));
        }
        if self.aux_m < 1 {
            return Err(SamplerError::InvalidConfig(
                "aux_m must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

const CCV_PARAMS: [&str; 8] = ["a0", "a1", "mu00", "lambda0", "s0", "s1", "eta", "gamma"];

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Dp(_) => ModelKind::Dp,
            ModelConfig::Dpgmm(_) => ModelKind::Dpgmm,
            ModelConfig::Ccv(_) => ModelKind::Ccv,
            ModelConfig::Dcv(_) => ModelKind::Dcv,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        match self {
            ModelConfig::Dp(c) => c.validate(),
            ModelConfig::Dpgmm(c) => c.validate(),
            ModelConfig::Ccv(c) => c.validate(),
            ModelConfig::Dcv(c) => c.validate(),
        }
    }

    /// Scalar parameters that a sweep may perturb.
    pub fn parameter_names(&self) -> Vec<&'static str> {
        match self {
            ModelConfig::Dp(c) => {
                let mut names = vec!["alpha"];
                if matches!(c.g0, BaseMeasure::Beta { .. }) {
                    names.extend(["g0_a", "g0_b"]);
                }
                if matches!(c.bandwidth, Bandwidth::Fixed(_)) {
                    names.push("bandwidth");
                }
                names
            }
            ModelConfig::Dpgmm(_) => vec!["alpha", "m", "r", "nu", "s"],
            ModelConfig::Ccv(_) => CCV_PARAMS.to_vec(),
            ModelConfig::Dcv(_) => {
                let mut names = CCV_PARAMS.to_vec();
                names.push("phi");
                names
            }
        }
    }

    fn unknown(&self, parameter: &str) -> SamplerError {
        SamplerError::UnknownParameter {
            model: self.kind(),
            parameter: parameter.to_string(),
        }
    }

    pub fn get(&self, parameter: &str) -> Result<f64, SamplerError> {
        let value = match (self, parameter) {
            (ModelConfig::Dp(c), "alpha") => Some(c.alpha),
            (ModelConfig::Dp(c), "g0_a") => match c.g0 {
                BaseMeasure::Beta { a, .. } => Some(a),
                BaseMeasure::Uniform => None,
            },
            (ModelConfig::Dp(c), "g0_b") => match c.g0 {
                BaseMeasure::Beta { b, .. } => Some(b),
                BaseMeasure::Uniform => None,
            },
            (ModelConfig::Dp(c), "bandwidth") => match c.bandwidth {
                Bandwidth::Fixed(h) => Some(h),
                Bandwidth::Auto => None,
            },
            (ModelConfig::Dpgmm(c), p) => match p {
                "alpha" => Some(c.alpha),
                "m" => Some(c.m),
                "r" => Some(c.r),
                "nu" => Some(c.nu),
                "s" => Some(c.s),
                _ => None,
            },
            (ModelConfig::Ccv(c), p) => ccv_get(c, p),
            (ModelConfig::Dcv(c), "phi") => Some(c.phi),
            (ModelConfig::Dcv(c), p) => ccv_get(&c.ccv, p),
            _ => None,
        };
        value.ok_or_else(|| self.unknown(parameter))
    }

    /// Copy of `self` with one scalar parameter replaced.
    pub fn with(&self, parameter: &str, value: f64) -> Result<ModelConfig, SamplerError> {
        let mut out = self.clone();
        let slot: Option<&mut f64> = match (&mut out, parameter) {
            (ModelConfig::Dp(c), "alpha") => Some(&mut c.alpha),
            (ModelConfig::Dp(c), "g0_a") => match &mut c.g0 {
                BaseMeasure::Beta { a, .. } => Some(a),
                BaseMeasure::Uniform => None,
            },
            (ModelConfig::Dp(c), "g0_b") => match &mut c.g0 {
                BaseMeasure::Beta { b, .. } => Some(b),
                BaseMeasure::Uniform => None,
            },
            (ModelConfig::Dp(c), "bandwidth") => match &mut c.bandwidth {
                Bandwidth::Fixed(h) => Some(h),
                Bandwidth::Auto => None,
            },
            (ModelConfig::Dpgmm(c), p) => match p {
                "alpha" => Some(&mut c.alpha),
                "m" => Some(&mut c.m),
                "r" => Some(&mut c.r),
                "nu" => Some(&mut c.nu),
                "s" => Some(&mut c.s),
                _ => None,
            },
            (ModelConfig::Ccv(c), p) => ccv_slot(c, p),
            (ModelConfig::Dcv(c), "phi") => Some(&mut c.phi),
            (ModelConfig::Dcv(c), p) => ccv_slot(&mut c.ccv, p),
            _ => None,
        };
        match slot {
            Some(s) => *s = value,
            None => return Err(self.unknown(parameter)),
        }
        Ok(out)
    }

    /// Runs the matching sampler.
    pub fn sample(
        &self,
        data: &Dataset,
        ctl: &McmcControl,
        grid: Grid,
    ) -> Result<PosteriorSample, SamplerError> {
        match self {
            ModelConfig::Dp(c) => dp_posterior(data, c, ctl, grid),
            ModelConfig::Dpgmm(c) => dpgmm_posterior(data, c, ctl, grid),
            ModelConfig::Ccv(c) => ccv_posterior(data, c, ctl, grid),
            ModelConfig::Dcv(c) => dcv_posterior(data, c, ctl, grid),
        }
    }
}

fn ccv_get(c: &CcvConfig, p: &str) -> Option<f64> {
    Some(match p {
        "a0" => c.a0,
        "a1" => c.a1,
        "mu00" => c.mu00,
        "lambda0" => c.lambda0,
        "s0" => c.s0,
        "s1" => c.s1,
        "eta" => c.eta,
        "gamma" => c.gamma,
        _ => return None,
    })
}

fn ccv_slot<'a>(c: &'a mut CcvConfig, p: &str) -> Option<&'a mut f64> {
    Some(match p {
        "a0" => &mut c.a0,
        "a1" => &mut c.a1,
        "mu00" => &mut c.mu00,
        "lambda0" => &mut c.lambda0,
        "s0" => &mut c.s0,
        "s1" => &mut c.s1,
        "eta" => &mut c.eta,
        "gamma" => &mut c.gamma,
        _ => return None,
    })
}

/// Per-retained-state summary, for trace inspection.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceRow {
    /// Occupied clusters, or sticks broken for the DP.
    pub clusters: usize,
    pub alpha: f64,
    pub a: Option<f64>,
    pub sigma2: Option<f64>,
    pub mu0: Option<f64>,
    /// `max_j |mu_j - mu0|` over occupied clusters.
    pub max_mean_deviation: Option<f64>,
    /// Mean `|log(v_j / median v)|` of the component variances.
    pub variance_dispersion: Option<f64>,
}

/// Posterior density draws from one model fit.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSample {
    pub pdfs: Vec<GridPdf>,
    pub model: ModelKind,
    pub config: ModelConfig,
    pub seed: u64,
    pub trace: Vec<TraceRow>,
}

impl PosteriorSample {
    pub fn grid(&self) -> Option<Grid> {
        self.pdfs.first().map(|p| p.grid())
    }

    pub fn len(&self) -> usize {
        self.pdfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pdfs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_round_trip() {
        let data = Dataset::new("t", vec![1.0, 2.0, 4.0], Transform::None).unwrap();
        let configs = [
            ModelConfig::Dp(DpConfig {
                g0: BaseMeasure::Beta { a: 5.0, b: 5.0 },
                ..DpConfig::default()
            }),
            ModelConfig::Dpgmm(DpgmmConfig::default()),
            ModelConfig::Ccv(CcvConfig::baseline_for(&data)),
            ModelConfig::Dcv(DcvConfig::baseline_for(&data)),
        ];
        for c in &configs {
            for p in c.parameter_names() {
                let v = c.get(p).unwrap();
                let changed = c.with(p, v + 0.25).unwrap();
                assert_eq!(changed.get(p).unwrap(), v + 0.25);
                for q in c.parameter_names().into_iter().filter(|q| *q != p) {
                    assert_eq!(changed.get(q).unwrap(), c.get(q).unwrap());
                }
            }
            assert!(matches!(
                c.get("nonsense"),
                Err(SamplerError::UnknownParameter { .. })
            ));
        }
    }

    #[test]
    fn uniform_dp_has_no_shape_parameters() {
        let c = ModelConfig::Dp(DpConfig::default());
        assert_eq!(c.parameter_names(), vec!["alpha"]);
        assert!(c.with("g0_b", 2.0).is_err());
    }

    #[test]
    fn validation() {
        let mut dcv =
            DcvConfig::baseline_for(&Dataset::new("t", vec![1.0, 2.0], Transform::None).unwrap());
        dcv.phi = 1.0;
        assert_eq!(dcv.validate(), Err(SamplerError::InvalidPhi(1.0)));
        let dp = DpConfig {
            truncation: 10,
            ..DpConfig::default()
        };
        assert!(dp.validate().is_err());
        let g = DpgmmConfig {
            nu: 0.5,
            ..DpgmmConfig::default()
        };
        assert!(g.validate().is_err());
        let ctl = McmcControl {
            n_samples: 5,
            ..McmcControl::default()
        };
        assert!(ctl.validate().is_err());
    }

    #[test]
    fn retention_schedule() {
        let ctl = McmcControl {
            n_samples: 10,
            burn_in: 7,
            thin: 3,
            seed: 0,
        };
        let kept = (0..ctl.total_sweeps()).filter(|s| ctl.keeps(*s)).count();
        assert_eq!(kept, 10);
        assert!(!ctl.keeps(6));
        assert!(ctl.keeps(9));
    }
}
