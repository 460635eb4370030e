use rand::Rng;
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};

use super::ccv::max_deviation;
use super::crp::Clusters;
use super::hyper::{gamma_rate, normal, Hyper};
use super::math::{ln_normal, mixture_on_grid, rng, sample_log_weights, Component};
use super::{
    Dataset, DcvConfig, McmcControl, ModelConfig, ModelKind, PosteriorSample, SamplerError,
    TraceRow,
};
use crate::geometry::Grid;

/// Quantile nodes used to integrate the prior predictive over `zeta^-1`.
const PRIOR_NODES: usize = 32;

/// One prior draw of `zeta^-1 ~ Gamma(phi, 1)`.
pub fn draw_inverse_zeta<R: Rng + ?Sized>(rng: &mut R, phi: f64) -> f64 {
    gamma_rate(rng, phi, 1.0)
}

/// Cluster mean and `omega = zeta^-1`.
#[derive(Clone, Copy, Debug, Default)]
struct Atom {
    mu: f64,
    omega: f64,
}

/// Gibbs sampler for the different component variance mixture.
///
/// Component `j` has variance `a (phi - 1) sigma^2 / omega_j`. Assignments are
/// updated with `aux_m` auxiliary components drawn from the base measure; the
/// remaining updates follow the common variance sampler.
pub fn dcv_posterior(
    data: &Dataset,
    cfg: &DcvConfig,
    ctl: &McmcControl,
    grid: Grid,
) -> Result<PosteriorSample, SamplerError> {
    if data.is_empty() {
        return Err(SamplerError::EmptyDataset);
    }
    cfg.validate()?;
    ctl.validate()?;
    let ccv = &cfg.ccv;
    let phi = cfg.phi;
    let xs = data.observations();
    let n = xs.len();
    let mut h = Hyper::initial(ccv);
    let mut clusters = Clusters::single(
        xs,
        Atom {
            mu: ccv.mu00,
            omega: phi,
        },
    );
    let mut r = rng(ctl.seed);
    let mut pdfs = Vec::with_capacity(ctl.n_samples);
    let mut trace = Vec::with_capacity(ctl.n_samples);

    let prior_omega: Vec<f64> = {
        let g = GammaDist::new(phi, 1.0).map_err(|e| SamplerError::InvalidConfig(e.to_string()))?;
        (0..PRIOR_NODES)
            .map(|q| g.inverse_cdf((q as f64 + 0.5) / PRIOR_NODES as f64))
            .collect()
    };

    let mut aux = vec![Atom::default(); cfg.aux_m];
    let mut lw = Vec::new();
    for sweep in 0..ctl.total_sweeps() {
        let c = h.a * (phi - 1.0) * h.sigma2();
        let w = h.mean_var();
        let ln_aux = (h.alpha / cfg.aux_m as f64).ln();

        for (i, &x) in xs.iter().enumerate() {
            let freed = clusters.remove(i, x);
            for (k, slot) in aux.iter_mut().enumerate() {
                *slot = match (k, freed) {
                    (0, Some(atom)) => atom,
                    _ => Atom {
                        mu: normal(&mut r, h.mu0, w),
                        omega: draw_inverse_zeta(&mut r, phi),
                    },
                };
            }
            lw.clear();
            lw.extend(
                clusters
                    .stats
                    .iter()
                    .zip(&clusters.params)
                    .map(|(s, p)| (s.n as f64).ln() + ln_normal(x, p.mu, c / p.omega)),
            );
            lw.extend(aux.iter().map(|p| ln_aux + ln_normal(x, p.mu, c / p.omega)));
            let k = sample_log_weights(&mut r, &mut lw);
            let existing = clusters.len();
            if k < existing {
                clusters.join(i, x, k);
            } else {
                clusters.open(i, x, aux[k - existing]);
            }
        }

        for (p, s) in clusters.params.iter_mut().zip(&clusters.stats) {
            let v = c / p.omega;
            let prec = 1.0 / w + s.n as f64 / v;
            p.mu = normal(&mut r, (h.mu0 / w + s.sum / v) / prec, 1.0 / prec);
            let ss = s.scatter_about(p.mu);
            p.omega = gamma_rate(&mut r, phi + 0.5 * s.n as f64, 1.0 + ss / (2.0 * c));
        }
        let scatter: f64 = clusters
            .stats
            .iter()
            .zip(&clusters.params)
            .map(|(s, p)| s.scatter_about(p.mu) * p.omega / (phi - 1.0))
            .sum();
        let means: Vec<f64> = clusters.params.iter().map(|p| p.mu).collect();
        h.update(&mut r, ccv, n, &means, scatter);

        if !ctl.keeps(sweep) {
            continue;
        }
        let c = h.a * (phi - 1.0) * h.sigma2();
        let total = n as f64 + h.alpha;
        let variances: Vec<f64> = clusters.params.iter().map(|p| c / p.omega).collect();
        let mut components: Vec<(f64, Component)> = clusters
            .stats
            .iter()
            .zip(&clusters.params)
            .zip(&variances)
            .map(|((s, p), &var)| (s.n as f64 / total, Component::Normal { mean: p.mu, var }))
            .collect();
        let node_weight = h.alpha / total / PRIOR_NODES as f64;
        components.extend(prior_omega.iter().map(|om| {
            (
                node_weight,
                Component::Normal {
                    mean: h.mu0,
                    var: h.mean_var() + c / om,
                },
            )
        }));
        pdfs.push(mixture_on_grid(grid, data.rescale(), &mut components)?);
        trace.push(TraceRow {
            clusters: clusters.len(),
            alpha: h.alpha,
            a: Some(h.a),
            sigma2: Some(h.sigma2()),
            mu0: Some(h.mu0),
            max_mean_deviation: Some(max_deviation(&means, h.mu0)),
            variance_dispersion: Some(dispersion(&variances)),
        });
    }

    Ok(PosteriorSample {
        pdfs,
        model: ModelKind::Dcv,
        config: ModelConfig::Dcv(cfg.clone()),
        seed: ctl.seed,
        trace,
    })
}

/// Mean `|log(v / median v)|`.
fn dispersion(variances: &[f64]) -> f64 {
    let mut sorted = variances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    variances
        .iter()
        .map(|v| (v / median).ln().abs())
        .sum::<f64>()
        / k as f64
}
