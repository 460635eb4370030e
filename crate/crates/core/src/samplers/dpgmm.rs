use super::crp::{collapsed_sweep, Clusters, CollapsedKernel, SuffStats};
use super::math::{mixture_on_grid, rng, Component, StudentT};
use super::{
    Dataset, DpgmmConfig, McmcControl, ModelConfig, ModelKind, PosteriorSample, SamplerError,
    TraceRow,
};
use crate::geometry::Grid;

/// Normal-Gamma base measure: precision `R ~ Gamma(nu/2, rate nu*s/2)`,
/// mean `N(m, 1/(r R))`.
struct NormalGamma {
    kappa0: f64,
    m: f64,
    a0: f64,
    b0: f64,
    prior: StudentT,
}

impl NormalGamma {
    fn new(cfg: &DpgmmConfig) -> Self {
        let mut ng = Self {
            kappa0: cfg.r,
            m: cfg.m,
            a0: 0.5 * cfg.nu,
            b0: 0.5 * cfg.nu * cfg.s,
            prior: StudentT::new(1.0, 0.0, 1.0),
        };
        ng.prior = ng.predictive(&SuffStats::default());
        ng
    }

    /// Student-t posterior predictive given a cluster's statistics.
    fn predictive(&self, s: &SuffStats) -> StudentT {
        let n = s.n as f64;
        let kappa = self.kappa0 + n;
        let a = self.a0 + 0.5 * n;
        let (loc, b) = if s.n == 0 {
            (self.m, self.b0)
        } else {
            let mean = s.mean();
            (
                (self.kappa0 * self.m + s.sum) / kappa,
                self.b0
                    + 0.5 * s.scatter()
                    + self.kappa0 * n * (mean - self.m).powi(2) / (2.0 * kappa),
            )
        };
        StudentT::new(2.0 * a, loc, b * (kappa + 1.0) / (a * kappa))
    }
}

impl CollapsedKernel for NormalGamma {
    fn ln_predictive(&self, stats: &SuffStats, x: f64) -> f64 {
        self.predictive(stats).ln_pdf(x)
    }

    fn ln_prior_predictive(&self, x: f64) -> f64 {
        self.prior.ln_pdf(x)
    }
}

/// Collapsed Gibbs sampler for the univariate conjugate DPGMM.
///
/// Each retained state becomes the predictive density given the partition:
/// the cluster Student-t predictives weighted `n_j/(n+alpha)` plus the prior
/// predictive weighted `alpha/(n+alpha)`.
pub fn dpgmm_posterior(
    data: &Dataset,
    cfg: &DpgmmConfig,
    ctl: &McmcControl,
    grid: Grid,
) -> Result<PosteriorSample, SamplerError> {
    if data.is_empty() {
        return Err(SamplerError::EmptyDataset);
    }
    cfg.validate()?;
    ctl.validate()?;
    let xs = data.observations();
    let n = xs.len() as f64;
    let kernel = NormalGamma::new(cfg);
    let mut clusters = Clusters::single(xs, ());
    let mut r = rng(ctl.seed);
    let mut pdfs = Vec::with_capacity(ctl.n_samples);
    let mut trace = Vec::with_capacity(ctl.n_samples);

    for sweep in 0..ctl.total_sweeps() {
        collapsed_sweep(&mut clusters, xs, cfg.alpha, &kernel, &mut r);
        if !ctl.keeps(sweep) {
            continue;
        }
        let mut components: Vec<(f64, Component)> = clusters
            .stats
            .iter()
            .map(|s| {
                (
                    s.n as f64 / (n + cfg.alpha),
                    Component::StudentT(kernel.predictive(s)),
                )
            })
            .collect();
        components.push((
            cfg.alpha / (n + cfg.alpha),
            Component::StudentT(kernel.prior),
        ));
        pdfs.push(mixture_on_grid(grid, data.rescale(), &mut components)?);
        trace.push(TraceRow {
            clusters: clusters.len(),
            alpha: cfg.alpha,
            ..TraceRow::default()
        });
    }

    Ok(PosteriorSample {
        pdfs,
        model: ModelKind::Dpgmm,
        config: ModelConfig::Dpgmm(cfg.clone()),
        seed: ctl.seed,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::math::ln_normal;
    use crate::samplers::Transform;

    fn ctl(n: usize, seed: u64) -> McmcControl {
        McmcControl {
            n_samples: n,
            burn_in: 20,
            thin: 2,
            seed,
        }
    }

    #[test]
    fn predictive_matches_direct_integration() {
        // p(x | y) = int N(x; mu, 1/R) p(mu, R | y) by brute force
        let cfg = DpgmmConfig::default();
        let ng = NormalGamma::new(&cfg);
        let ys = [0.4, -0.3, 1.1];
        let mut s = SuffStats::default();
        ys.iter().for_each(|&y| s.add(y));
        let t = ng.predictive(&s);
        let x = 0.7;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..400 {
            let prec = i as f64 * 0.02;
            for j in -300..300 {
                let mu = j as f64 * 0.02;
                let prior = (ng.a0 - 1.0) * prec.ln() - ng.b0 * prec
                    + ln_normal(mu, ng.m, 1.0 / (ng.kappa0 * prec));
                let lik: f64 = ys.iter().map(|&y| ln_normal(y, mu, 1.0 / prec)).sum();
                let w = (prior + lik).exp();
                den += w;
                num += w * ln_normal(x, mu, 1.0 / prec).exp();
            }
        }
        assert!((num / den - t.ln_pdf(x).exp()).abs() < 1e-3);
    }

    #[test]
    fn single_observation_gives_one_cluster() {
        let d = Dataset::new("one", vec![0.3], Transform::None).unwrap();
        let s = dpgmm_posterior(
            &d,
            &DpgmmConfig::default(),
            &ctl(20, 1),
            Grid::new(64).unwrap(),
        )
        .unwrap();
        assert!(s.trace.iter().all(|t| t.clusters == 1));
    }

    #[test]
    fn deterministic_and_normalized() {
        let xs: Vec<f64> = (0..40)
            .map(|i| ((i * 37) % 17) as f64 / 4.0 - 2.0)
            .collect();
        let d = Dataset::new("t", xs, Transform::None).unwrap();
        let g = Grid::new(128).unwrap();
        let a = dpgmm_posterior(&d, &DpgmmConfig::default(), &ctl(15, 9), g).unwrap();
        let b = dpgmm_posterior(&d, &DpgmmConfig::default(), &ctl(15, 9), g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 15);
        for p in &a.pdfs {
            assert!((g.integrate(p.values()) - 1.0).abs() < 1e-8);
        }
        let c = dpgmm_posterior(&d, &DpgmmConfig::default(), &ctl(15, 10), g).unwrap();
        assert_ne!(a.pdfs, c.pdfs);
    }
}
