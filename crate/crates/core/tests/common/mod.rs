#![allow(dead_code)]

use frsense::geometry::{exp_map, TangentVector};
use frsense::{DpConfig, Grid, GridPdf, ModelConfig, ModelKind, PosteriorSample, Srd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A floor plus up to four Gaussian bumps, normalized.
pub fn random_mixture(r: &mut ChaCha8Rng, grid: Grid) -> GridPdf {
    let k = r.random_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                r.random_range(0.2..1.0),
                r.random_range(0.1..0.9),
                r.random_range(0.05..0.25),
            )
        })
        .collect();
    let floor = r.random_range(0.05..0.5);
    GridPdf::from_fn(grid, |x| {
        floor
            + bumps
                .iter()
                .map(|(w, m, s)| w * (-0.5 * ((x - m) / s).powi(2)).exp() / s)
                .sum::<f64>()
    })
    .unwrap()
}

/// `cos(2 pi k x)` scaled to unit norm; orthogonal to constants and to each
/// other on a uniform grid.
pub fn cosine_direction(grid: Grid, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = grid
        .abscissae()
        .iter()
        .map(|x| (2.0 * std::f64::consts::PI * k as f64 * x).cos())
        .collect();
    let n = grid.norm(&raw);
    raw.into_iter().map(|v| v / n).collect()
}

/// `exp_map(base, sum_k c_k e_k)` for each coordinate row.
pub fn from_coordinates(base: &Srd, basis: &[Vec<f64>], coords: &[Vec<f64>]) -> Vec<Srd> {
    coords
        .iter()
        .map(|c| {
            let mut v = vec![0.0; base.grid().n_points()];
            for (ck, e) in c.iter().zip(basis) {
                v.iter_mut().zip(e).for_each(|(a, b)| *a += ck * b);
            }
            exp_map(base, &TangentVector::project(base.clone(), v).unwrap()).unwrap()
        })
        .collect()
}

pub fn as_sample(srds: &[Srd]) -> PosteriorSample {
    PosteriorSample {
        pdfs: srds.iter().map(|s| s.to_pdf()).collect(),
        model: ModelKind::Dp,
        config: ModelConfig::Dp(DpConfig::default()),
        seed: 0,
        trace: Vec::new(),
    }
}
