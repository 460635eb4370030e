use super::crp::{collapsed_sweep, Clusters, CollapsedKernel, SuffStats};
use super::hyper::{normal, Hyper};
use super::math::{ln_normal, mixture_on_grid, rng, Component};
use super::{
    CcvConfig, Dataset, McmcControl, ModelConfig, ModelKind, PosteriorSample, SamplerError,
    TraceRow,
};
use crate::geometry::Grid;

/// Cluster means integrated out: observation variance `v = a sigma^2`, mean
/// prior `N(mu0, w)` with `w = (1 - a) sigma^2`.
struct MarginalMean {
    mu0: f64,
    v: f64,
    w: f64,
}

impl MarginalMean {
    fn of(h: &Hyper) -> Self {
        Self {
            mu0: h.mu0,
            v: h.a * h.sigma2(),
            w: h.mean_var(),
        }
    }

    /// Posterior mean and variance of a cluster mean.
    fn posterior(&self, s: &SuffStats) -> (f64, f64) {
        let prec = 1.0 / self.w + s.n as f64 / self.v;
        ((self.mu0 / self.w + s.sum / self.v) / prec, 1.0 / prec)
    }
}

impl CollapsedKernel for MarginalMean {
    fn ln_predictive(&self, stats: &SuffStats, x: f64) -> f64 {
        let (m, var) = self.posterior(stats);
        ln_normal(x, m, self.v + var)
    }

    fn ln_prior_predictive(&self, x: f64) -> f64 {
        ln_normal(x, self.mu0, self.v + self.w)
    }
}

/// Gibbs sampler for the common component variance mixture.
///
/// A sweep updates the assignments with the cluster means integrated out,
/// then the means, `mu0`, `sigma^-2`, `a` (griddy Gibbs) and `alpha`
/// (random-walk Metropolis on `log alpha`).
pub fn ccv_posterior(
    data: &Dataset,
    cfg: &CcvConfig,
    ctl: &McmcControl,
    grid: Grid,
) -> Result<PosteriorSample, SamplerError> {
    if data.is_empty() {
        return Err(SamplerError::EmptyDataset);
    }
    cfg.validate()?;
    ctl.validate()?;
    let xs = data.observations();
    let n = xs.len();
    let mut h = Hyper::initial(cfg);
    let mut clusters: Clusters<f64> = Clusters::single(xs, cfg.mu00);
    let mut r = rng(ctl.seed);
    let mut pdfs = Vec::with_capacity(ctl.n_samples);
    let mut trace = Vec::with_capacity(ctl.n_samples);

    for sweep in 0..ctl.total_sweeps() {
        collapsed_sweep(&mut clusters, xs, h.alpha, &MarginalMean::of(&h), &mut r);

        let kernel = MarginalMean::of(&h);
        for (mu, s) in clusters.params.iter_mut().zip(&clusters.stats) {
            let (m, var) = kernel.posterior(s);
            *mu = normal(&mut r, m, var);
        }
        let scatter: f64 = clusters
            .stats
            .iter()
            .zip(&clusters.params)
            .map(|(s, mu)| s.scatter_about(*mu))
            .sum();
        h.update(&mut r, cfg, n, &clusters.params, scatter);

        if !ctl.keeps(sweep) {
            continue;
        }
        let total = n as f64 + h.alpha;
        let v = h.a * h.sigma2();
        let mut components: Vec<(f64, Component)> = clusters
            .stats
            .iter()
            .zip(&clusters.params)
            .map(|(s, &mean)| (s.n as f64 / total, Component::Normal { mean, var: v }))
            .collect();
        components.push((
            h.alpha / total,
            Component::Normal {
                mean: h.mu0,
                var: h.sigma2(),
            },
        ));
        pdfs.push(mixture_on_grid(grid, data.rescale(), &mut components)?);
        trace.push(TraceRow {
            clusters: clusters.len(),
            alpha: h.alpha,
            a: Some(h.a),
            sigma2: Some(h.sigma2()),
            mu0: Some(h.mu0),
            max_mean_deviation: Some(max_deviation(&clusters.params, h.mu0)),
            variance_dispersion: None,
        });
    }

    Ok(PosteriorSample {
        pdfs,
        model: ModelKind::Ccv,
        config: ModelConfig::Ccv(cfg.clone()),
        seed: ctl.seed,
        trace,
    })
}

pub(crate) fn max_deviation(means: &[f64], mu0: f64) -> f64 {
    means.iter().map(|m| (m - mu0).abs()).fold(0.0, f64::max)
}
