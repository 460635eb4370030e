use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Equally spaced abscissae on `[0, 1]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 16;
    pub const DEFAULT_POINTS: usize = 512;

    pub fn new(n_points: usize) -> Result<Self, GeometryError> {
        if n_points < Self::MIN_POINTS {
            return Err(GeometryError::GridTooSmall(n_points));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_points - 1) as f64
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            1.0
        } else {
            i as f64 / (self.n_points - 1) as f64
        }
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.abscissa(i)).collect()
    }

    /// Trapezoidal quadrature weight of grid point `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n_points {
            0.5 * h
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.weight(i)).collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let interior: f64 = values[1..n - 1].iter().sum();
        self.spacing() * (interior + 0.5 * (values[0] + values[n - 1]))
    }

    /// Trapezoidal L2 inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.n_points);
        debug_assert_eq!(b.len(), self.n_points);
        let n = a.len();
        let interior: f64 = a[1..n - 1]
            .iter()
            .zip(&b[1..n - 1])
            .map(|(x, y)| x * y)
            .sum();
        self.spacing() * (interior + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), GeometryError> {
        if len != self.n_points {
            return Err(GeometryError::LengthMismatch {
                expected: self.n_points,
                found: len,
            });
        }
        Ok(())
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n_points: Self::DEFAULT_POINTS,
        }
    }
}
