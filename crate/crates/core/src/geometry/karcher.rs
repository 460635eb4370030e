use serde::{Deserialize, Serialize};

use super::{same_grid, sphere, GeometryError, Srd};

/// Settings of the gradient iteration for the Karcher mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KarcherOptions {
    /// Stop once the mean tangent direction is shorter than this.
    pub tolerance: f64,
    /// Step size applied to the mean tangent direction.
    pub step: f64,
    pub max_iter: usize,
}

impl Default for KarcherOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            step: 0.5,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KarcherMean {
    pub mean: Srd,
    /// Number of update steps taken.
    pub iterations: usize,
    /// Norm of the mean tangent direction at `mean`.
    pub gradient_norm: f64,
    /// False when `max_iter` was exhausted; `mean` is then the best iterate.
    pub converged: bool,
}

impl KarcherMean {
    pub fn require_converged(self) -> Result<Self, GeometryError> {
        if self.converged {
            Ok(self)
        } else {
            Err(GeometryError::MaxIterations {
                iterations: self.iterations,
                gradient_norm: self.gradient_norm,
            })
        }
    }
}

/// Intrinsic (Karcher) mean of square-root densities by gradient descent,
/// started from the normalized extrinsic average.
pub fn karcher_mean(samples: &[Srd], opts: &KarcherOptions) -> Result<KarcherMean, GeometryError> {
    let first = samples.first().ok_or(GeometryError::EmptyInput)?;
    let grid = first.grid;
    for s in samples {
        same_grid(grid, s.grid)?;
    }
    let n_points = grid.n_points();
    let inv_n = 1.0 / samples.len() as f64;

    let mut extrinsic = vec![0.0; n_points];
    for s in samples {
        extrinsic
            .iter_mut()
            .zip(&s.values)
            .for_each(|(a, v)| *a += v);
    }
    let mut current = Srd::project(grid, extrinsic)?;

    let mut best: Option<(Srd, f64)> = None;
    let mut direction = vec![0.0; n_points];
    let mut iterations = 0;
    loop {
        direction.iter_mut().for_each(|d| *d = 0.0);
        for s in samples {
            let u = sphere::log(grid, &current.values, &s.values)?;
            direction
                .iter_mut()
                .zip(&u)
                .for_each(|(d, v)| *d += v * inv_n);
        }
        let gradient_norm = grid.norm(&direction);
        if gradient_norm < opts.tolerance {
            return Ok(KarcherMean {
                mean: current,
                iterations,
                gradient_norm,
                converged: true,
            });
        }
        if best.as_ref().is_none_or(|(_, g)| gradient_norm < *g) {
            best = Some((current.clone(), gradient_norm));
        }
        if iterations >= opts.max_iter {
            let (mean, gradient_norm) = best.expect("at least one iterate recorded");
            return Ok(KarcherMean {
                mean,
                iterations,
                gradient_norm,
                converged: false,
            });
        }
        direction.iter_mut().for_each(|d| *d *= opts.step);
        current = sphere::exp(grid, &current.values, &direction)?;
        iterations += 1;
    }
}

/// Mean squared geodesic distance of `samples` from `mean`.
pub fn karcher_variance(samples: &[Srd], mean: &Srd) -> Result<f64, GeometryError> {
    if samples.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let mut acc = 0.0;
    for s in samples {
        same_grid(mean.grid, s.grid)?;
        let d = sphere::distance(mean.grid, &mean.values, &s.values);
        acc += d * d;
    }
    Ok(acc / samples.len() as f64)
}
