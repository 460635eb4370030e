use nalgebra::{DMatrix, SymmetricEigen};

use super::{sphere, GeometryError, KarcherMean, KarcherOptions, Srd};

/// Eigenvalues whose magnitude is below this are reported as zero.
const EIGEN_FLOOR: f64 = 1e-10;
/// Eigenvectors are only formed for eigenvalues above this fraction of the
/// largest one.
const RELATIVE_RANK_TOL: f64 = 1e-13;

/// Tangent principal component analysis of a sample of square-root densities.
#[derive(Clone, Debug)]
pub struct TpcaResult {
    pub mean: KarcherMean,
    /// Covariance-operator eigenvalues, nonincreasing. There are
    /// `min(n_samples, n_points)` of them.
    pub eigenvalues: Vec<f64>,
    /// Grid functions orthonormal under the trapezoidal inner product, one
    /// per numerically nonzero eigenvalue, in the same order.
    pub eigenvectors: Vec<Vec<f64>>,
    pub n_samples: usize,
}

impl TpcaResult {
    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// The `d` leading eigenvalues, or an error when fewer exist.
    pub fn leading(&self, d: usize) -> Result<&[f64], GeometryError> {
        if self.eigenvalues.len() < d {
            return Err(GeometryError::InsufficientSamples {
                needed: d,
                found: self.eigenvalues.len(),
            });
        }
        Ok(&self.eigenvalues[..d])
    }
}

/// Karcher mean, tangent vectors at the mean and the eigendecomposition of
/// their sample covariance operator `C = 1/(n-1) sum v_i v_i^T`.
///
/// The operator is discretized with trapezoidal weights `W`, so the matrix
/// that is diagonalized is `W^{1/2} C W^{1/2}` and its eigenvalues approximate
/// those of the continuum operator. When `n < N` the `n x n` Gram matrix is
/// used instead; both share their nonzero spectrum.
pub fn tangent_pca(samples: &[Srd], opts: &KarcherOptions) -> Result<TpcaResult, GeometryError> {
    if samples.len() < 2 {
        return Err(GeometryError::InsufficientSamples {
            needed: 2,
            found: samples.len(),
        });
    }
    let mean = super::karcher_mean(samples, opts)?;
    let grid = mean.mean.grid();
    let n = samples.len();
    let n_points = grid.n_points();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let scale = 1.0 / ((n - 1) as f64).sqrt();

    let mut a = DMatrix::<f64>::zeros(n_points, n);
    for (j, s) in samples.iter().enumerate() {
        let v = sphere::log(grid, mean.mean.values(), s.values())?;
        for (i, x) in v.iter().enumerate() {
            a[(i, j)] = x * sqrt_w[i] * scale;
        }
    }

    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = if n < n_points {
        let gram = a.transpose() * &a;
        let eig = SymmetricEigen::new(gram);
        let order = descending(&eig.eigenvalues);
        let top = eig.eigenvalues[order[0]].max(0.0);
        let mut vals = Vec::with_capacity(n);
        let mut vecs = Vec::new();
        for &k in &order {
            let lambda = eig.eigenvalues[k];
            vals.push(clamp_eigenvalue(lambda));
            if lambda > 0.0 && lambda > top * RELATIVE_RANK_TOL {
                let u = &a * eig.eigenvectors.column(k) / lambda.sqrt();
                vecs.push(u.iter().copied().collect());
            }
        }
        (vals, vecs)
    } else {
        let cov = &a * a.transpose();
        let eig = SymmetricEigen::new(cov);
        let order = descending(&eig.eigenvalues);
        let top = eig.eigenvalues[order[0]].max(0.0);
        let mut vals = Vec::with_capacity(n_points);
        let mut vecs = Vec::new();
        for &k in &order {
            let lambda = eig.eigenvalues[k];
            vals.push(clamp_eigenvalue(lambda));
            if lambda > 0.0 && lambda > top * RELATIVE_RANK_TOL {
                vecs.push(eig.eigenvectors.column(k).iter().copied().collect());
            }
        }
        (vals, vecs)
    };

    let eigenvectors = vectors
        .into_iter()
        .map(|u| {
            let mut phi: Vec<f64> = u.iter().zip(&sqrt_w).map(|(x, s)| x / s).collect();
            fix_sign(&mut phi);
            phi
        })
        .collect();

    Ok(TpcaResult {
        mean,
        eigenvalues: values,
        eigenvectors,
        n_samples: n,
    })
}

fn descending(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

fn clamp_eigenvalue(lambda: f64) -> f64 {
    if lambda.abs() < EIGEN_FLOOR || lambda < 0.0 {
        0.0
    } else {
        lambda
    }
}

/// Makes the entry of largest magnitude positive (earliest index on ties).
fn fix_sign(phi: &mut [f64]) {
    let mut best = 0;
    for (i, v) in phi.iter().enumerate() {
        if v.abs() > phi[best].abs() {
            best = i;
        }
    }
    if phi[best] < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{exp_map, GridPdf, TangentVector};
    use crate::Grid;

    fn base(g: Grid) -> Srd {
        GridPdf::from_fn(g, |x| 1.0 + 0.5 * (3.0 * x).sin())
            .unwrap()
            .to_srd()
    }

    #[test]
    fn needs_two_samples() {
        let g = Grid::new(64).unwrap();
        assert!(matches!(
            tangent_pca(&[base(g)], &KarcherOptions::default()),
            Err(GeometryError::InsufficientSamples {
                needed: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn sign_convention_prefers_earliest_tie() {
        let mut v = vec![0.5, -1.0, 1.0];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.5, 1.0, -1.0]);
    }

    #[test]
    fn geodesic_sample_has_rank_one() {
        let g = Grid::new(200).unwrap();
        let mu = base(g);
        let raw: Vec<f64> = g.abscissae().iter().map(|x| (6.0 * x).cos()).collect();
        let dir = TangentVector::project(mu.clone(), raw).unwrap();
        let dir = dir.scaled(0.2 / dir.norm());
        let samples: Vec<Srd> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|t| exp_map(&mu, &dir.scaled(*t)).unwrap())
            .collect();
        let res = tangent_pca(&samples, &KarcherOptions::default()).unwrap();
        let big = res.eigenvalues.iter().filter(|l| **l > 1e-10).count();
        assert_eq!(big, 1);
        assert_eq!(res.eigenvectors.len(), 1);
        // sum of squared tangent norms over n-1
        let expected = (4.0 + 1.0 + 0.0 + 1.0 + 4.0) * 0.04 / 4.0;
        assert!((res.eigenvalues[0] - expected).abs() < 1e-8);
    }

    #[test]
    fn large_sample_route_matches_gram_route() {
        // n > N takes the N x N path, n < N the Gram path
        let g = Grid::new(16).unwrap();
        let mu = base(g);
        let samples: Vec<Srd> = (0..20)
            .map(|k| {
                let raw: Vec<f64> = g
                    .abscissae()
                    .iter()
                    .map(|x| (k as f64 * 1.3 * x + 0.2 * k as f64).sin())
                    .collect();
                let v = TangentVector::project(mu.clone(), raw).unwrap();
                exp_map(&mu, &v.scaled(0.05 / v.norm().max(1e-12))).unwrap()
            })
            .collect();
        let res = tangent_pca(&samples, &KarcherOptions::default()).unwrap();
        assert_eq!(res.eigenvalues.len(), 16);
        let small = tangent_pca(&samples[..15], &KarcherOptions::default()).unwrap();
        assert_eq!(small.eigenvalues.len(), 15);
        for w in res.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for (i, u) in res.eigenvectors.iter().enumerate() {
            for (j, v) in res.eigenvectors.iter().enumerate() {
                let ip = g.inner(u, v);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-6, "{i} {j} {ip}");
            }
        }
    }
}
