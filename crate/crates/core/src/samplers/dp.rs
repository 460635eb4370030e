use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::math::{beta_one, rng};
use super::{
    Bandwidth, BaseMeasure, Dataset, DpConfig, McmcControl, ModelConfig, ModelKind,
    PosteriorSample, SamplerError, TraceRow,
};
use crate::geometry::{normalize_pdf, Grid};

/// Residual stick mass tolerated before the remainder is absorbed.
const RESIDUAL_TOL: f64 = 1e-6;
/// Hard cap on sticks per draw.
const MAX_STICKS: usize = 2_000_000;

/// Rule-of-thumb bandwidth `1.06 * sd * n^(-1/5)` of unit-scale data, floored
/// at two grid spacings.
pub fn silverman_bandwidth(unit_obs: &[f64], grid: Grid) -> f64 {
    let n = unit_obs.len() as f64;
    let mean = unit_obs.iter().sum::<f64>() / n;
    let sd = if unit_obs.len() > 1 {
        (unit_obs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (1.06 * sd * n.powf(-0.2)).max(2.0 * grid.spacing())
}

enum Centering {
    Uniform,
    Beta(Beta<f64>),
}

impl Centering {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Centering::Uniform => rng.random(),
            Centering::Beta(b) => b.sample(rng),
        }
    }
}

/// Posterior draws of a DP with centering measure on `[0, 1]`.
///
/// Each draw is a stick-breaking realization of
/// `DP(alpha + n, alpha/(alpha+n) G0 + n/(alpha+n) F_n)`, with `Beta(1, alpha
/// + n)` stick fractions and the last atom absorbing the remaining mass. The
/// atoms are linearly binned onto the grid and smoothed with a Gaussian
/// kernel. Draw `k` uses its own pair of RNG streams, one for the sticks and
/// atom selection and one for draws from `G0`, so runs that differ only in
/// `alpha` consume the first stream in lockstep.
pub fn dp_posterior(
    data: &Dataset,
    cfg: &DpConfig,
    ctl: &McmcControl,
    grid: Grid,
) -> Result<PosteriorSample, SamplerError> {
    if data.is_empty() {
        return Err(SamplerError::EmptyDataset);
    }
    cfg.validate()?;
    ctl.validate()?;
    let obs = data.unit_observations();
    let n = obs.len() as f64;
    let total = cfg.alpha + n;
    let prior_weight = cfg.alpha / total;
    let centering = match cfg.g0 {
        BaseMeasure::Uniform => Centering::Uniform,
        BaseMeasure::Beta { a, b } => Centering::Beta(
            Beta::new(a, b).map_err(|e| SamplerError::InvalidConfig(e.to_string()))?,
        ),
    };
    let bandwidth = match cfg.bandwidth {
        Bandwidth::Auto => silverman_bandwidth(&obs, grid),
        Bandwidth::Fixed(h) => h,
    };

    let n_points = grid.n_points();
    let h = grid.spacing();
    let kernel: Vec<f64> = (0..n_points)
        .map(|d| {
            let z = d as f64 * h / bandwidth;
            (-0.5 * z * z).exp() / (bandwidth * (2.0 * PI).sqrt())
        })
        .collect();

    let mut pdfs = Vec::with_capacity(ctl.n_samples);
    let mut trace = Vec::with_capacity(ctl.n_samples);
    let mut bins = vec![0.0; n_points];
    for draw in 0..ctl.n_samples {
        let mut r = rng(ctl.seed);
        r.set_stream(2 * draw as u64);
        let mut r_g0 = rng(ctl.seed);
        r_g0.set_stream(2 * draw as u64 + 1);
        bins.iter_mut().for_each(|b| *b = 0.0);

        let mut atom = |r: &mut super::math::SamplerRng| {
            let u: f64 = r.random();
            let pick: f64 = r.random();
            if u < prior_weight {
                centering.draw(&mut r_g0)
            } else {
                obs[((pick * n) as usize).min(obs.len() - 1)]
            }
        };

        let mut remaining = 1.0;
        let mut sticks = 0;
        loop {
            let v = beta_one(&mut r, total);
            let w = remaining * v;
            remaining -= w;
            sticks += 1;
            deposit(&mut bins, atom(&mut r), w);
            if sticks + 1 >= cfg.truncation && remaining <= RESIDUAL_TOL {
                break;
            }
            if sticks >= MAX_STICKS {
                return Err(SamplerError::TruncationTooSmall {
                    residual: remaining,
                    sticks,
                });
            }
        }
        deposit(&mut bins, atom(&mut r), remaining);
        sticks += 1;

        let active: Vec<(usize, f64)> = bins
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, b)| (j, *b))
            .collect();
        let values: Vec<f64> = (0..n_points)
            .map(|i| active.iter().map(|&(j, b)| b * kernel[i.abs_diff(j)]).sum())
            .collect();
        pdfs.push(normalize_pdf(grid, values)?);
        trace.push(TraceRow {
            clusters: sticks,
            alpha: cfg.alpha,
            ..TraceRow::default()
        });
    }

    Ok(PosteriorSample {
        pdfs,
        model: ModelKind::Dp,
        config: ModelConfig::Dp(cfg.clone()),
        seed: ctl.seed,
        trace,
    })
}

fn deposit(bins: &mut [f64], atom: f64, weight: f64) {
    let last = bins.len() - 1;
    let t = atom.clamp(0.0, 1.0) * last as f64;
    let i = (t.floor() as usize).min(last - 1);
    let frac = t - i as f64;
    bins[i] += weight * (1.0 - frac);
    bins[i + 1] += weight * frac;
}
