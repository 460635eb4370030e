//! Shift, spread and covariance-shape measures between two posterior samples.
//!
//! `D` is the Fisher-Rao distance between the Karcher means, `V` the log ratio
//! of Karcher variances and `E` the distance between the normalized
//! cumulative spectra of the tangent covariance operators.

use thiserror::Error;

use crate::geometry::{
    karcher_mean, karcher_variance, tangent_pca, GeometryError, KarcherOptions, Srd,
};
use crate::samplers::PosteriorSample;

/// Karcher variances below this are treated as a collapsed sample.
pub const MIN_VARIANCE: f64 = 1e-14;
/// Number of leading eigenvalues compared by `E` unless configured.
pub const DEFAULT_COMPONENTS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensitivityError {
    #[error("Karcher variance {variance:e} is too small for a log ratio")]
    DegenerateSample { variance: f64 },
    #[error("need more than {needed} draws, found {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("need at least 2 values for a band, found {found}")]
    InsufficientValues { found: usize },
    #[error("d must be at least 2, got {0}")]
    InvalidComponents(usize),
    #[error("band level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("sample has no draws")]
    EmptySample,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureTriple {
    pub d_shift: f64,
    pub v_spread: f64,
    pub e_covshape: f64,
    pub d_components: usize,
}

impl MeasureTriple {
    pub fn zero(d_components: usize) -> Self {
        Self {
            d_shift: 0.0,
            v_spread: 0.0,
            e_covshape: 0.0,
            d_components,
        }
    }
}

/// Cumulative sums of the `d` leading eigenvalues divided by their total.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeSpectrum {
    pub omega: Vec<f64>,
}

impl CumulativeSpectrum {
    pub fn from_eigenvalues(eigenvalues: &[f64], d: usize) -> Result<Self, SensitivityError> {
        if d < 2 {
            return Err(SensitivityError::InvalidComponents(d));
        }
        if eigenvalues.len() < d {
            return Err(SensitivityError::InsufficientSamples {
                needed: d,
                found: eigenvalues.len(),
            });
        }
        let top = &eigenvalues[..d];
        let total: f64 = top.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(SensitivityError::DegenerateSample { variance: total });
        }
        let mut acc = 0.0;
        let mut omega: Vec<f64> = top
            .iter()
            .map(|l| {
                acc += l;
                (acc / total).min(1.0)
            })
            .collect();
        omega[d - 1] = 1.0;
        Ok(Self { omega })
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.omega
            .iter()
            .zip(&other.omega)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Everything the measures need from one posterior sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSummary {
    pub mean: Srd,
    pub converged: bool,
    /// Mean squared distance to `mean`.
    pub variance: f64,
    /// Tangent covariance eigenvalues, nonincreasing; empty for one draw.
    pub eigenvalues: Vec<f64>,
    pub n_draws: usize,
}

impl SampleSummary {
    pub fn new(sample: &PosteriorSample, opts: &KarcherOptions) -> Result<Self, SensitivityError> {
        let srds: Vec<Srd> = sample.pdfs.iter().map(|p| p.to_srd()).collect();
        Self::from_srds(&srds, opts)
    }

    pub fn from_srds(srds: &[Srd], opts: &KarcherOptions) -> Result<Self, SensitivityError> {
        if srds.is_empty() {
            return Err(SensitivityError::EmptySample);
        }
        let (km, eigenvalues) = if srds.len() == 1 {
            (karcher_mean(srds, opts)?, Vec::new())
        } else {
            let t = tangent_pca(srds, opts)?;
            (t.mean, t.eigenvalues)
        };
        Ok(Self {
            variance: karcher_variance(srds, &km.mean)?,
            mean: km.mean,
            converged: km.converged,
            eigenvalues,
            n_draws: srds.len(),
        })
    }

    pub fn shift_to(&self, other: &Self) -> Result<f64, SensitivityError> {
        Ok(self.mean.distance(&other.mean)?)
    }

    /// `log(var(other)) - log(var(self))`.
    pub fn spread_to(&self, other: &Self) -> Result<f64, SensitivityError> {
        if self == other {
            return Ok(0.0);
        }
        for v in [self.variance, other.variance] {
            if v < MIN_VARIANCE {
                return Err(SensitivityError::DegenerateSample { variance: v });
            }
        }
        Ok(other.variance.ln() - self.variance.ln())
    }

    fn check_components(&self, d: usize) -> Result<(), SensitivityError> {
        if d < 2 {
            return Err(SensitivityError::InvalidComponents(d));
        }
        if self.n_draws <= d {
            return Err(SensitivityError::InsufficientSamples {
                needed: d,
                found: self.n_draws,
            });
        }
        Ok(())
    }

    pub fn spectrum(&self, d: usize) -> Result<CumulativeSpectrum, SensitivityError> {
        self.check_components(d)?;
        CumulativeSpectrum::from_eigenvalues(&self.eigenvalues, d)
    }

    pub fn covshape_to(&self, other: &Self, d: usize) -> Result<f64, SensitivityError> {
        if self == other {
            self.check_components(d)?;
            return Ok(0.0);
        }
        Ok(self.spectrum(d)?.distance(&other.spectrum(d)?))
    }

    /// All three measures from `self` (baseline) to `other` (perturbed).
    pub fn compare(&self, other: &Self, d: usize) -> Result<MeasureTriple, SensitivityError> {
        Ok(MeasureTriple {
            d_shift: self.shift_to(other)?,
            v_spread: self.spread_to(other)?,
            e_covshape: self.covshape_to(other, d)?,
            d_components: d,
        })
    }
}

fn summarize(sample: &PosteriorSample) -> Result<SampleSummary, SensitivityError> {
    SampleSummary::new(sample, &KarcherOptions::default())
}

/// Fisher-Rao distance between the Karcher means of the two samples.
pub fn measure_d(base: &PosteriorSample, pert: &PosteriorSample) -> Result<f64, SensitivityError> {
    summarize(base)?.shift_to(&summarize(pert)?)
}

/// Log ratio of Karcher variances, perturbed over baseline.
pub fn measure_v(base: &PosteriorSample, pert: &PosteriorSample) -> Result<f64, SensitivityError> {
    summarize(base)?.spread_to(&summarize(pert)?)
}

/// Distance between the cumulative spectra of the `d` leading tangent
/// eigenvalues.
pub fn measure_e(
    base: &PosteriorSample,
    pert: &PosteriorSample,
    d: usize,
) -> Result<f64, SensitivityError> {
    summarize(base)?.covshape_to(&summarize(pert)?, d)
}

/// Largest possible `E` for `d` components: `sqrt(sum_{j<d} (1 - j/d)^2)`.
pub fn e_upper_bound(d: usize) -> f64 {
    let df = d as f64;
    (1..d)
        .map(|j| (1.0 - j as f64 / df).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Central `level` band of `values` from linearly interpolated empirical
/// quantiles.
pub fn replicate_band(values: &[f64], level: f64) -> Result<(f64, f64), SensitivityError> {
    if values.len() < 2 {
        return Err(SensitivityError::InsufficientValues {
            found: values.len(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(SensitivityError::InvalidLevel(level));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok((quantile(&sorted, tail), quantile(&sorted, 1.0 - tail)))
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
