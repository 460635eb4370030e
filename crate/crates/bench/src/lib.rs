//! Shared fixtures for the benchmarks.

use frsense::samplers::Transform;
use frsense::{Dataset, Grid, GridPdf, Srd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` square-root densities of random two-bump mixtures.
pub fn random_srds(n: usize, grid: Grid, seed: u64) -> Vec<Srd> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (m1, m2) = (r.random_range(0.1..0.5), r.random_range(0.5..0.9));
            let w = r.random_range(0.2..0.8);
            GridPdf::from_fn(grid, |x| {
                0.1 + w * (-50.0 * (x - m1).powi(2)).exp()
                    + (1.0 - w) * (-50.0 * (x - m2).powi(2)).exp()
            })
            .expect("positive mixture")
            .to_srd()
        })
        .collect()
}

/// Three well separated Gaussian groups on the raw scale.
pub fn three_clumps(n: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let xs = (0..n)
        .map(|i| {
            let (m, s) = [(-3.0, 0.4), (0.0, 0.6), (4.0, 0.5)][i % 3];
            let z: f64 = (0..12).map(|_| r.random::<f64>()).sum::<f64>() - 6.0;
            m + s * z
        })
        .collect();
    Dataset::new("clumps", xs, Transform::None).expect("finite data")
}

pub fn uniform_unit(n: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Dataset::on_unit_interval("uniform", (0..n).map(|_| r.random()).collect())
        .expect("draws lie in [0, 1)")
}
