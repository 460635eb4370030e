use rand::Rng;

use super::math::{rng, sample_log_weights};
use super::{McmcControl, SamplerError};

/// Count, sum and sum of squares of the observations in a cluster.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct SuffStats {
    pub n: usize,
    pub sum: f64,
    pub sumsq: f64,
}

impl SuffStats {
    pub fn of(x: f64) -> Self {
        Self {
            n: 1,
            sum: x,
            sumsq: x * x,
        }
    }

    pub fn add(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    pub fn remove(&mut self, x: f64) {
        self.n -= 1;
        if self.n == 0 {
            *self = Self::default();
        } else {
            self.sum -= x;
            self.sumsq -= x * x;
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Sum of squared deviations from the cluster mean.
    pub fn scatter(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.sumsq - self.sum * self.sum / self.n as f64).max(0.0)
    }

    /// Sum of squared deviations from `centre`.
    pub fn scatter_about(&self, centre: f64) -> f64 {
        (self.sumsq - 2.0 * centre * self.sum + self.n as f64 * centre * centre).max(0.0)
    }
}

/// A partition of observations into clusters carrying per-cluster state.
#[derive(Clone, Debug)]
pub(crate) struct Clusters<T> {
    pub assign: Vec<usize>,
    pub stats: Vec<SuffStats>,
    pub params: Vec<T>,
}

impl<T> Clusters<T> {
    pub fn single(xs: &[f64], param: T) -> Self {
        let mut stats = SuffStats::default();
        xs.iter().for_each(|&x| stats.add(x));
        Self {
            assign: vec![0; xs.len()],
            stats: vec![stats],
            params: vec![param],
        }
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    /// Takes observation `i` out of its cluster. If the cluster empties it is
    /// dropped and its parameters are returned.
    pub fn remove(&mut self, i: usize, x: f64) -> Option<T> {
        let j = self.assign[i];
        self.assign[i] = usize::MAX;
        self.stats[j].remove(x);
        if self.stats[j].n > 0 {
            return None;
        }
        let last = self.stats.len() - 1;
        self.stats.swap_remove(j);
        let removed = self.params.swap_remove(j);
        if j != last {
            for a in self.assign.iter_mut() {
                if *a == last {
                    *a = j;
                }
            }
        }
        Some(removed)
    }

    pub fn join(&mut self, i: usize, x: f64, j: usize) {
        self.assign[i] = j;
        self.stats[j].add(x);
    }

    pub fn open(&mut self, i: usize, x: f64, param: T) {
        self.assign[i] = self.stats.len();
        self.stats.push(SuffStats::of(x));
        self.params.push(param);
    }
}

/// Marginal predictive densities for a collapsed assignment update.
pub(crate) trait CollapsedKernel {
    /// `log p(x | observations already in the cluster)`.
    fn ln_predictive(&self, stats: &SuffStats, x: f64) -> f64;
    /// `log p(x)` under the base measure.
    fn ln_prior_predictive(&self, x: f64) -> f64;
}

/// One Gibbs sweep over all assignments with cluster parameters integrated
/// out. New clusters are opened with `T::default()`.
pub(crate) fn collapsed_sweep<T: Default, K: CollapsedKernel, R: Rng + ?Sized>(
    clusters: &mut Clusters<T>,
    xs: &[f64],
    alpha: f64,
    kernel: &K,
    rng: &mut R,
) {
    let ln_alpha = alpha.ln();
    let mut weights = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        clusters.remove(i, x);
        weights.clear();
        weights.extend(
            clusters
                .stats
                .iter()
                .map(|s| (s.n as f64).ln() + kernel.ln_predictive(s, x)),
        );
        weights.push(ln_alpha + kernel.ln_prior_predictive(x));
        let k = sample_log_weights(rng, &mut weights);
        if k == clusters.len() {
            clusters.open(i, x, T::default());
        } else {
            clusters.join(i, x, k);
        }
    }
}

/// Kernel with a flat likelihood: the sweep then targets the CRP prior.
struct PriorOnly;

impl CollapsedKernel for PriorOnly {
    fn ln_predictive(&self, _: &SuffStats, _: f64) -> f64 {
        0.0
    }

    fn ln_prior_predictive(&self, _: f64) -> f64 {
        0.0
    }
}

/// Runs the collapsed assignment sampler with no likelihood on `n` items and
/// returns the number of clusters in each retained state.
pub fn crp_prior_cluster_counts(
    alpha: f64,
    n: usize,
    ctl: &McmcControl,
) -> Result<Vec<usize>, SamplerError> {
    ctl.validate()?;
    if n == 0 {
        return Err(SamplerError::EmptyDataset);
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(SamplerError::InvalidConfig(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let xs = vec![0.0; n];
    let mut clusters = Clusters::single(&xs, ());
    let mut r = rng(ctl.seed);
    let mut out = Vec::with_capacity(ctl.n_samples);
    for sweep in 0..ctl.total_sweeps() {
        collapsed_sweep(&mut clusters, &xs, alpha, &PriorOnly, &mut r);
        if ctl.keeps(sweep) {
            out.push(clusters.len());
        }
    }
    Ok(out)
}
