use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use super::CcvConfig;

/// Points of the griddy-Gibbs grid for `a`.
const A_GRID: usize = 200;
/// Standard deviation of the random walk on `log alpha`.
const LOG_ALPHA_STEP: f64 = 0.3;

/// Griffin-Steel prior density
/// `gamma^eta Gamma(2 eta) / Gamma(eta)^2 * alpha^(eta-1) / (alpha+gamma)^(2 eta)`.
pub fn griffin_steel_density(alpha: f64, eta: f64, gamma: f64) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    ln_griffin_steel(alpha, eta, gamma).exp()
}

pub(crate) fn ln_griffin_steel(alpha: f64, eta: f64, gamma: f64) -> f64 {
    eta * gamma.ln() + ln_gamma(2.0 * eta) - 2.0 * ln_gamma(eta) + (eta - 1.0) * alpha.ln()
        - 2.0 * eta * (alpha + gamma).ln()
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + var.sqrt() * z
}

pub(crate) fn gamma_rate<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("gamma parameters are positive")
        .sample(rng)
}

/// Log-scale random-walk Metropolis step for the DP precision given `k`
/// occupied clusters among `n` observations.
pub(crate) fn update_alpha<R: Rng + ?Sized>(
    rng: &mut R,
    alpha: f64,
    k: usize,
    n: usize,
    eta: f64,
    gamma: f64,
) -> f64 {
    // target in log alpha, Jacobian included
    let target = |a: f64| {
        ln_griffin_steel(a, eta, gamma) + k as f64 * a.ln() + ln_gamma(a) - ln_gamma(a + n as f64)
            + a.ln()
    };
    let z: f64 = StandardNormal.sample(rng);
    let proposal = alpha * (LOG_ALPHA_STEP * z).exp();
    let log_ratio = target(proposal) - target(alpha);
    let u: f64 = rng.random();
    if u.ln() < log_ratio {
        proposal
    } else {
        alpha
    }
}

/// Griddy-Gibbs draw of `a` from
/// `a^(a0-1-n/2) (1-a)^(a1-1-k/2) exp(-x_term/a - mu_term/(1-a))`.
pub(crate) fn update_a<R: Rng + ?Sized>(
    rng: &mut R,
    a0: f64,
    a1: f64,
    n: usize,
    k: usize,
    x_term: f64,
    mu_term: f64,
) -> f64 {
    let pa = a0 - 1.0 - 0.5 * n as f64;
    let pb = a1 - 1.0 - 0.5 * k as f64;
    let points: Vec<f64> = (0..A_GRID)
        .map(|i| (i as f64 + 0.5) / A_GRID as f64)
        .collect();
    let mut lw: Vec<f64> = points
        .iter()
        .map(|&a| pa * a.ln() + pb * (1.0 - a).ln() - x_term / a - mu_term / (1.0 - a))
        .collect();
    points[super::math::sample_log_weights(rng, &mut lw)]
}

/// Hyperparameters shared by the common and different component variance
/// models.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Hyper {
    pub mu0: f64,
    /// Precision `sigma^-2`.
    pub tau: f64,
    pub a: f64,
    pub alpha: f64,
}

impl Hyper {
    pub fn initial(cfg: &CcvConfig) -> Self {
        Self {
            mu0: cfg.mu00,
            tau: cfg.s0 / cfg.s1,
            a: cfg.fixed_a.unwrap_or(cfg.a0 / (cfg.a0 + cfg.a1)),
            alpha: 1.0,
        }
    }

    pub fn sigma2(&self) -> f64 {
        1.0 / self.tau
    }

    /// Prior variance of a component mean, `(1 - a) sigma^2`.
    pub fn mean_var(&self) -> f64 {
        (1.0 - self.a) / self.tau
    }

    /// Updates `mu0`, `sigma^-2`, `a` and `alpha` in turn.
    ///
    /// `scatter` is `sum_i (x_i - mu_{z_i})^2 / s_{z_i}` where `s_j` is the
    /// variance of component `j` in units of `a sigma^2`.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        cfg: &CcvConfig,
        n: usize,
        means: &[f64],
        scatter: f64,
    ) {
        let k = means.len();
        let w = self.mean_var();
        let prec = cfg.lambda0 + k as f64 / w;
        let centre = (cfg.lambda0 * cfg.mu00 + means.iter().sum::<f64>() / w) / prec;
        self.mu0 = normal(rng, centre, 1.0 / prec);

        let mu_ss: f64 = means.iter().map(|m| (m - self.mu0).powi(2)).sum();
        let shape = cfg.s0 + 0.5 * (n + k) as f64;
        let rate = cfg.s1 + scatter / (2.0 * self.a) + mu_ss / (2.0 * (1.0 - self.a));
        self.tau = gamma_rate(rng, shape, rate);

        if cfg.fixed_a.is_none() {
            self.a = update_a(
                rng,
                cfg.a0,
                cfg.a1,
                n,
                k,
                0.5 * self.tau * scatter,
                0.5 * self.tau * mu_ss,
            );
        }
        self.alpha = update_alpha(rng, self.alpha, k, n, cfg.eta, cfg.gamma);
    }
}
