use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use super::{Rescale, SamplerError};
use crate::geometry::{normalize_pdf, Grid, GridPdf};

pub(crate) type SamplerRng = ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> SamplerRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

pub(crate) fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -LN_SQRT_2PI - 0.5 * var.ln() - 0.5 * d * d / var
}

/// Location-scale Student-t with `scale2` the squared scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct StudentT {
    pub df: f64,
    pub loc: f64,
    pub scale2: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(df: f64, loc: f64, scale2: f64) -> Self {
        let ln_norm =
            ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI * scale2).ln();
        Self {
            df,
            loc,
            scale2,
            ln_norm,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.loc).powi(2) / (self.scale2 * self.df);
        self.ln_norm - 0.5 * (self.df + 1.0) * z.ln_1p()
    }
}

/// Draws an index with probability proportional to `exp(log_weights[i])`.
/// Overwrites `log_weights` with unnormalized weights.
pub(crate) fn sample_log_weights<R: Rng + ?Sized>(rng: &mut R, log_weights: &mut [f64]) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for w in log_weights.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in log_weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    // round-off: last index with positive weight
    log_weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// A mixture component in model units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Component {
    Normal { mean: f64, var: f64 },
    StudentT(StudentT),
}

impl Component {
    fn pdf(&self, x: f64) -> f64 {
        match self {
            Component::Normal { mean, var } => ln_normal(x, *mean, *var).exp(),
            Component::StudentT(t) => t.ln_pdf(x).exp(),
        }
    }

    fn key(&self) -> (f64, f64) {
        match self {
            Component::Normal { mean, var } => (*mean, *var),
            Component::StudentT(t) => (t.loc, t.scale2),
        }
    }
}

/// Evaluates a weighted mixture at the grid abscissae mapped to model units
/// and normalizes it on `[0, 1]`.
///
/// Components are summed in a canonical order, so the result does not depend
/// on cluster labels.
pub(crate) fn mixture_on_grid(
    grid: Grid,
    rescale: Rescale,
    components: &mut [(f64, Component)],
) -> Result<GridPdf, SamplerError> {
    components.sort_by(|(wa, ca), (wb, cb)| {
        let (a0, a1) = ca.key();
        let (b0, b1) = cb.key();
        wa.total_cmp(wb)
            .then(a0.total_cmp(&b0))
            .then(a1.total_cmp(&b1))
    });
    let values: Vec<f64> = grid
        .abscissae()
        .into_iter()
        .map(|u| {
            let x = rescale.from_unit(u);
            components.iter().map(|(w, c)| w * c.pdf(x)).sum()
        })
        .collect();
    Ok(normalize_pdf(grid, values)?)
}

/// `Beta(1, b)` by inversion.
pub(crate) fn beta_one<R: Rng + ?Sized>(rng: &mut R, b: f64) -> f64 {
    let u: f64 = rng.random();
    1.0 - (1.0 - u).powf(1.0 / b)
}
