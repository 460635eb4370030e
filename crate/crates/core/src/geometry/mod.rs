//! Fisher-Rao geometry of univariate densities on `[0, 1]`.
//!
//! A density `p` is represented by its square-root density `psi = sqrt(p)`,
//! which lives on the positive orthant of the unit Hilbert sphere. Under this
//! map the Fisher-Rao metric becomes the ordinary L2 metric, so distances are
//! great-circle angles and the exponential map has a closed form. All
//! integrals use the trapezoidal rule on a [`Grid`].

mod grid;
mod karcher;
mod tpca;

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

pub use grid::Grid;
pub use karcher::{karcher_mean, karcher_variance, KarcherMean, KarcherOptions};
pub use tpca::{tangent_pca, TpcaResult};

/// Tolerance on the unit-integral invariants of [`GridPdf`] and [`Srd`].
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Tolerance on the orthogonality of a [`TangentVector`] to its base point.
pub const TANGENCY_TOL: f64 = 1e-6;
/// Below this norm or angle the exp/log maps use their small-angle limit.
pub const SMALL_ANGLE: f64 = 1e-12;
/// The log map refuses pairs this close to orthogonal.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("grid needs at least {min} points, got {0}", min = Grid::MIN_POINTS)]
    GridTooSmall(usize),
    #[error("expected {expected} grid values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("density is identically zero")]
    AllZero,
    #[error("negative density value {value} at grid index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("non-finite value at grid index {index}")]
    NonFinite { index: usize },
    #[error("integral {integral} differs from 1")]
    NotNormalized { integral: f64 },
    #[error("grids differ ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },
    #[error("tangent vector is not based at the given point")]
    BaseMismatch,
    #[error("tangent vector has inner product {0} with its base point")]
    NotTangent(f64),
    #[error("points are {distance} apart, at or beyond the orthant boundary")]
    AntipodalOrBoundary { distance: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error(
        "Karcher mean did not converge in {iterations} iterations (gradient norm {gradient_norm})"
    )]
    MaxIterations {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("need at least {needed} samples, got {found}")]
    InsufficientSamples { needed: usize, found: usize },
}

fn check_finite_nonnegative(values: &[f64]) -> Result<(), GeometryError> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(GeometryError::NonFinite { index });
        }
        if value < 0.0 {
            return Err(GeometryError::NegativeValue { index, value });
        }
    }
    Ok(())
}

fn same_grid(a: Grid, b: Grid) -> Result<(), GeometryError> {
    if a != b {
        return Err(GeometryError::GridMismatch {
            left: a.n_points(),
            right: b.n_points(),
        });
    }
    Ok(())
}

/// A probability density sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridPdf {
    grid: Grid,
    values: Vec<f64>,
}

impl GridPdf {
    /// Wraps values that already integrate to one.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GeometryError> {
        grid.check_len(values.len())?;
        check_finite_nonnegative(&values)?;
        let integral = grid.integrate(&values);
        if (integral - 1.0).abs() > NORMALIZATION_TOL {
            return Err(GeometryError::NotNormalized { integral });
        }
        Ok(Self { grid, values })
    }

    pub fn uniform(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![1.0; grid.n_points()],
        }
    }

    /// Evaluates `f` on the grid and normalizes the result.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, GeometryError> {
        normalize_pdf(grid, grid.abscissae().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Square-root density of `self`.
    pub fn to_srd(&self) -> Srd {
        let mut values: Vec<f64> = self.values.iter().map(|p| p.sqrt()).collect();
        let norm = self.grid.norm(&values);
        values.iter_mut().for_each(|v| *v /= norm);
        Srd {
            grid: self.grid,
            values,
        }
    }
}

/// Rescales a nonnegative grid function to unit trapezoidal integral.
pub fn normalize_pdf(grid: Grid, mut raw: Vec<f64>) -> Result<GridPdf, GeometryError> {
    grid.check_len(raw.len())?;
    check_finite_nonnegative(&raw)?;
    let integral = grid.integrate(&raw);
    if integral <= 0.0 {
        return Err(GeometryError::AllZero);
    }
    raw.iter_mut().for_each(|v| *v /= integral);
    Ok(GridPdf { grid, values: raw })
}

/// Square-root density: a nonnegative grid function with unit L2 norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Srd {
    grid: Grid,
    values: Vec<f64>,
}

impl Srd {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GeometryError> {
        grid.check_len(values.len())?;
        check_finite_nonnegative(&values)?;
        let integral = grid.inner(&values, &values);
        if (integral - 1.0).abs() > NORMALIZATION_TOL {
            return Err(GeometryError::NotNormalized { integral });
        }
        Ok(Self { grid, values })
    }

    /// Clamps negative entries to zero and rescales to unit norm.
    pub(crate) fn project(grid: Grid, mut values: Vec<f64>) -> Result<Self, GeometryError> {
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite { index });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let norm = grid.norm(&values);
        if norm <= 0.0 {
            return Err(GeometryError::AllZero);
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Density `psi^2`.
    pub fn to_pdf(&self) -> GridPdf {
        let mut values: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        let integral = self.grid.integrate(&values);
        values.iter_mut().for_each(|v| *v /= integral);
        GridPdf {
            grid: self.grid,
            values,
        }
    }

    pub fn inner(&self, other: &Srd) -> Result<f64, GeometryError> {
        same_grid(self.grid, other.grid)?;
        Ok(self.grid.inner(&self.values, &other.values))
    }

    /// Great-circle distance to `other`.
    pub fn distance(&self, other: &Srd) -> Result<f64, GeometryError> {
        same_grid(self.grid, other.grid)?;
        Ok(sphere::distance(self.grid, &self.values, &other.values))
    }
}

/// Element of the tangent space at an [`Srd`].
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: Srd,
    values: Vec<f64>,
}

impl TangentVector {
    /// Checks that `values` is orthogonal to `base` within [`TANGENCY_TOL`].
    pub fn new(base: Srd, values: Vec<f64>) -> Result<Self, GeometryError> {
        base.grid.check_len(values.len())?;
        let ip = base.grid.inner(&base.values, &values);
        if ip.abs() > TANGENCY_TOL {
            return Err(GeometryError::NotTangent(ip));
        }
        Ok(Self { base, values })
    }

    /// Removes the component of `values` along `base`.
    pub fn project(base: Srd, mut values: Vec<f64>) -> Result<Self, GeometryError> {
        base.grid.check_len(values.len())?;
        let ip = base.grid.inner(&base.values, &values);
        values
            .iter_mut()
            .zip(&base.values)
            .for_each(|(v, b)| *v -= ip * b);
        Ok(Self { base, values })
    }

    pub fn zero(base: Srd) -> Self {
        let values = vec![0.0; base.grid.n_points()];
        Self { base, values }
    }

    pub fn base(&self) -> &Srd {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.base.grid.norm(&self.values)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            base: self.base.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Fisher-Rao geodesic distance between two densities, in `[0, pi/2]`.
pub fn fr_distance(p1: &GridPdf, p2: &GridPdf) -> Result<f64, GeometryError> {
    p1.to_srd().distance(&p2.to_srd())
}

/// Exponential map at `psi`.
pub fn exp_map(psi: &Srd, tangent: &TangentVector) -> Result<Srd, GeometryError> {
    if tangent.base != *psi {
        return Err(GeometryError::BaseMismatch);
    }
    sphere::exp(psi.grid, &psi.values, &tangent.values)
}

/// Inverse exponential (log) map at `psi1`, pointing towards `psi2`.
pub fn inv_exp_map(psi1: &Srd, psi2: &Srd) -> Result<TangentVector, GeometryError> {
    same_grid(psi1.grid, psi2.grid)?;
    let values = sphere::log(psi1.grid, &psi1.values, &psi2.values)?;
    Ok(TangentVector {
        base: psi1.clone(),
        values,
    })
}

/// `n_steps` equally spaced densities along the geodesic from `psi1` to `psi2`.
pub fn geodesic_path(
    psi1: &Srd,
    psi2: &Srd,
    n_steps: usize,
) -> Result<Vec<GridPdf>, GeometryError> {
    if n_steps < 2 {
        return Err(GeometryError::InsufficientSamples {
            needed: 2,
            found: n_steps,
        });
    }
    let direction = inv_exp_map(psi1, psi2)?;
    let last = n_steps - 1;
    let mut path = Vec::with_capacity(n_steps);
    path.push(psi1.to_pdf());
    for k in 1..last {
        let t = k as f64 / last as f64;
        let step: Vec<f64> = direction.values.iter().map(|v| t * v).collect();
        path.push(sphere::exp(psi1.grid, &psi1.values, &step)?.to_pdf());
    }
    path.push(psi2.to_pdf());
    Ok(path)
}

/// Slice-level sphere operations shared by the typed API and the iterative
/// algorithms.
pub(crate) mod sphere {
    use super::*;

    /// Angle between unit vectors via the chord length, which stays accurate
    /// for nearly identical points where `acos` of the inner product does not.
    pub fn distance(grid: Grid, a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let h = grid.spacing();
        let mut acc = 0.0;
        for i in 0..n {
            let d = a[i] - b[i];
            let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
            acc += w * d * d;
        }
        let half_chord = (acc.sqrt() * 0.5).min(1.0);
        (2.0 * half_chord.asin()).min(FRAC_PI_2)
    }

    pub fn log(grid: Grid, base: &[f64], target: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let angle = distance(grid, base, target);
        if angle >= FRAC_PI_2 - BOUNDARY_MARGIN {
            return Err(GeometryError::AntipodalOrBoundary { distance: angle });
        }
        if angle < SMALL_ANGLE {
            return Ok(vec![0.0; base.len()]);
        }
        let cos = grid.inner(base, target).clamp(-1.0, 1.0);
        let mut w: Vec<f64> = target.iter().zip(base).map(|(t, b)| t - cos * b).collect();
        // ||w|| = sin(angle); normalizing directly keeps the norm at `angle`
        let wn = grid.norm(&w);
        if wn <= 0.0 {
            return Ok(vec![0.0; base.len()]);
        }
        let scale = angle / wn;
        w.iter_mut().for_each(|v| *v *= scale);
        Ok(w)
    }

    pub fn exp(grid: Grid, base: &[f64], tangent: &[f64]) -> Result<Srd, GeometryError> {
        let norm = grid.norm(tangent);
        if norm < SMALL_ANGLE {
            return Srd::project(grid, base.to_vec());
        }
        let (s, c) = norm.sin_cos();
        let k = s / norm;
        let values = base
            .iter()
            .zip(tangent)
            .map(|(b, t)| c * b + k * t)
            .collect();
        Srd::project(grid, values)
    }
}
