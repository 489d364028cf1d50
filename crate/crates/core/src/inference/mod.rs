//! Posterior inference over distribution parameters.
//!
//! Parameters are sampled and optimized in an unconstrained space: positive
//! parameters go through `theta = exp(eta)`, real ones are left alone. Priors
//! are placed on the constrained values, so the only Jacobian term is the one
//! contributed by the bijection.

mod diagnostics;
mod mcmc;
mod optimize;

pub use diagnostics::{
    diagnostics, effective_sample_size, split_rhat, Diagnostics, ParamDiagnostics,
};
pub use mcmc::{sample_posterior, PosteriorDraws, SamplerConfig, SamplerMeta};
pub use optimize::{map_estimate, mse_fit, nelder_mead, MapEstimate, NelderMeadResult};

use serde::{Deserialize, Serialize};

use crate::distributions::{Constraint, Dist, Family};
use crate::error::{Error, Result};
use crate::orderstats::{
    gaussian_noise_loglik_unchecked, joint_os_loglik, QuantileObservation, DEFAULT_SIGMA_NOISE,
};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Prior on a single constrained parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorTerm {
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Improper uniform prior; contributes nothing to the log density.
    Flat,
}

impl PriorTerm {
    fn log_density(&self, theta: f64) -> f64 {
        match *self {
            PriorTerm::Normal { mean, sd } => {
                let z = (theta - mean) / sd;
                -LN_SQRT_2PI - sd.ln() - 0.5 * z * z
            }
            PriorTerm::Flat => 0.0,
        }
    }
}

/// Independent priors, one per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub terms: Vec<PriorTerm>,
}

impl PriorSpec {
    pub const DEFAULT_SD: f64 = 100.0;

    /// `N(0, 100²)` on every parameter.
    pub fn default_for(family: Family) -> Self {
        PriorSpec {
            terms: vec![
                PriorTerm::Normal {
                    mean: 0.0,
                    sd: Self::DEFAULT_SD
                };
                family.arity()
            ],
        }
    }

    pub fn flat(family: Family) -> Self {
        PriorSpec {
            terms: vec![PriorTerm::Flat; family.arity()],
        }
    }

    pub fn normal(terms: &[(f64, f64)]) -> Result<Self> {
        for &(mean, sd) in terms {
            if !(sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
                return Err(Error::Input(format!("invalid prior N({mean}, {sd}²)")));
            }
        }
        Ok(PriorSpec {
            terms: terms
                .iter()
                .map(|&(mean, sd)| PriorTerm::Normal { mean, sd })
                .collect(),
        })
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(theta)
            .map(|(t, &v)| t.log_density(v))
            .sum()
    }
}

/// Which noise model links the parameters to the observed quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodKind {
    OrderStatistics,
    GaussianNoise,
}

impl LikelihoodKind {
    pub fn name(self) -> &'static str {
        match self {
            LikelihoodKind::OrderStatistics => "order_statistics",
            LikelihoodKind::GaussianNoise => "gaussian_noise",
        }
    }
}

/// A complete Bayesian model: family, prior, data and likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub prior: PriorSpec,
    pub obs: QuantileObservation,
    pub likelihood: LikelihoodKind,
    pub sigma_noise: f64,
}

impl ModelSpec {
    pub fn new(
        family: Family,
        prior: PriorSpec,
        obs: QuantileObservation,
        likelihood: LikelihoodKind,
        sigma_noise: f64,
    ) -> Result<Self> {
        if prior.terms.len() != family.arity() {
            return Err(Error::Input(format!(
                "{family} has {} parameters but the prior has {}",
                family.arity(),
                prior.terms.len()
            )));
        }
        if !(sigma_noise > 0.0 && sigma_noise.is_finite()) {
            return Err(Error::Input(format!(
                "sigma_noise must be positive, got {sigma_noise}"
            )));
        }
        Ok(ModelSpec {
            family,
            prior,
            obs,
            likelihood,
            sigma_noise,
        })
    }

    /// Order-statistics likelihood with the default broad prior.
    pub fn order_statistics(family: Family, obs: QuantileObservation) -> Self {
        ModelSpec {
            family,
            prior: PriorSpec::default_for(family),
            obs,
            likelihood: LikelihoodKind::OrderStatistics,
            sigma_noise: DEFAULT_SIGMA_NOISE,
        }
    }

    /// Gaussian-noise likelihood with the default broad prior.
    pub fn gaussian_noise(
        family: Family,
        obs: QuantileObservation,
        sigma_noise: f64,
    ) -> Result<Self> {
        ModelSpec::new(
            family,
            PriorSpec::default_for(family),
            obs,
            LikelihoodKind::GaussianNoise,
            sigma_noise,
        )
    }

    pub fn with_prior(mut self, prior: PriorSpec) -> Result<Self> {
        if prior.terms.len() != self.family.arity() {
            return Err(Error::Input(
                "prior dimension does not match the family".into(),
            ));
        }
        self.prior = prior;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.family.arity()
    }

    /// Log-likelihood at constrained parameters; `-inf` if they are invalid.
    pub fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let Ok(d) = Dist::new(self.family, theta) else {
            return f64::NEG_INFINITY;
        };
        self.log_likelihood_dist(&d)
    }

    fn log_likelihood_dist(&self, d: &Dist) -> f64 {
        let v = match self.likelihood {
            LikelihoodKind::OrderStatistics => joint_os_loglik(d, &self.obs).value,
            LikelihoodKind::GaussianNoise => {
                gaussian_noise_loglik_unchecked(d, &self.obs, self.sigma_noise)
            }
        };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// Everything the sampler needs at one unconstrained point.
    pub(crate) fn evaluate(&self, eta: &[f64]) -> PointEval {
        let (theta, log_jacobian) = to_constrained(self.family, eta);
        let Ok(d) = Dist::new(self.family, &theta) else {
            return PointEval::rejected(theta);
        };
        let log_likelihood = self.log_likelihood_dist(&d);
        let log_posterior = log_likelihood + self.prior.log_density(&theta) + log_jacobian;
        if log_posterior.is_nan() {
            return PointEval::rejected(theta);
        }
        PointEval {
            theta,
            log_likelihood,
            log_posterior,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PointEval {
    pub theta: Vec<f64>,
    pub log_likelihood: f64,
    pub log_posterior: f64,
}

impl PointEval {
    fn rejected(theta: Vec<f64>) -> Self {
        PointEval {
            theta,
            log_likelihood: f64::NEG_INFINITY,
            log_posterior: f64::NEG_INFINITY,
        }
    }
}

/// Maps constrained parameters to the unconstrained space.
pub fn to_unconstrained(family: Family, theta: &[f64]) -> Result<Vec<f64>> {
    Dist::new(family, theta)?;
    Ok(family
        .constraints()
        .iter()
        .zip(theta)
        .map(|(c, &v)| match c {
            Constraint::Real => v,
            Constraint::Positive => v.ln(),
        })
        .collect())
}

/// Maps an unconstrained vector back, returning `(theta, ln |dθ/dη|)`.
pub fn to_constrained(family: Family, eta: &[f64]) -> (Vec<f64>, f64) {
    let mut log_jacobian = 0.0;
    let theta = family
        .constraints()
        .iter()
        .zip(eta)
        .map(|(c, &e)| match c {
            Constraint::Real => e,
            Constraint::Positive => {
                log_jacobian += e;
                e.exp()
            }
        })
        .collect();
    (theta, log_jacobian)
}

/// Unnormalized log posterior density in the unconstrained space:
/// log-likelihood + log-prior (on constrained values) + log-Jacobian.
/// Returns `-inf` in zero-density regions rather than failing.
pub fn log_posterior(model: &ModelSpec, eta: &[f64]) -> f64 {
    if eta.len() != model.dim() || eta.iter().any(|e| !e.is_finite()) {
        return f64::NEG_INFINITY;
    }
    model.evaluate(eta).log_posterior
}
