//! Adaptive random-walk Metropolis.
//!
//! Each chain starts from `eta ~ N(0, I)` and proposes `eta + s·L·z`. During
//! warmup the step size `s` follows a Robbins-Monro recursion towards the
//! target acceptance rate, and the shape `L` is re-estimated from the draws
//! of a sequence of doubling windows (Cholesky factor of the regularized
//! sample covariance). Everything is frozen once warmup ends.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::distributions::{Dist, Family};
use crate::error::{Error, Result};

const MAX_INIT_ATTEMPTS: usize = 100;
const MIN_WARMUP_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub warmup: usize,
    pub samples_per_chain: usize,
    pub seed: u64,
    pub target_acceptance: f64,
    pub initial_step_scale: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            warmup: 1000,
            samples_per_chain: 1000,
            seed: 0,
            target_acceptance: 0.3,
            initial_step_scale: 0.1,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.chains < 1 || self.warmup < 1 || self.samples_per_chain < 1 {
            return Err(Error::Input(
                "chains, warmup and samples_per_chain must all be at least 1".into(),
            ));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Input(format!(
                "target acceptance must lie in (0, 1), got {}",
                self.target_acceptance
            )));
        }
        if !(self.initial_step_scale > 0.0 && self.initial_step_scale.is_finite()) {
            return Err(Error::Input("initial step scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerMeta {
    pub seed: u64,
    pub chains: usize,
    pub warmup: usize,
    pub samples_per_chain: usize,
    /// Post-warmup acceptance rate averaged over chains.
    pub acceptance_rate: f64,
    pub chain_acceptance: Vec<f64>,
}

/// Retained posterior draws in the constrained space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDraws")]
pub struct PosteriorDraws {
    family: Family,
    /// One row per draw, one column per parameter.
    draws: Vec<Vec<f64>>,
    chain_id: Vec<usize>,
    log_likelihood: Vec<f64>,
    meta: SamplerMeta,
}

#[derive(Deserialize)]
struct RawDraws {
    family: Family,
    draws: Vec<Vec<f64>>,
    chain_id: Vec<usize>,
    log_likelihood: Vec<f64>,
    meta: SamplerMeta,
}

impl TryFrom<RawDraws> for PosteriorDraws {
    type Error = Error;

    fn try_from(raw: RawDraws) -> Result<Self> {
        PosteriorDraws::new(
            raw.family,
            raw.draws,
            raw.chain_id,
            raw.log_likelihood,
            raw.meta,
        )
    }
}

impl PosteriorDraws {
    pub fn new(
        family: Family,
        draws: Vec<Vec<f64>>,
        chain_id: Vec<usize>,
        log_likelihood: Vec<f64>,
        meta: SamplerMeta,
    ) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::Input(
                "posterior must contain at least one draw".into(),
            ));
        }
        if chain_id.len() != draws.len() || log_likelihood.len() != draws.len() {
            return Err(Error::Input(
                "draws, chain ids and log-likelihoods differ in length".into(),
            ));
        }
        for theta in &draws {
            Dist::new(family, theta)?;
        }
        Ok(PosteriorDraws {
            family,
            draws,
            chain_id,
            log_likelihood,
            meta,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.family.arity()
    }

    pub fn draws(&self) -> &[Vec<f64>] {
        &self.draws
    }

    pub fn chain_id(&self) -> &[usize] {
        &self.chain_id
    }

    pub fn log_likelihood(&self) -> &[f64] {
        &self.log_likelihood
    }

    pub fn meta(&self) -> &SamplerMeta {
        &self.meta
    }

    /// All draws of parameter `p`, in storage order.
    pub fn column(&self, p: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[p]).collect()
    }

    /// Draws of parameter `p` split by chain, ordered by chain id.
    pub fn chains(&self, p: usize) -> Vec<Vec<f64>> {
        let n_chains = self.chain_id.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); n_chains];
        for (row, &c) in self.draws.iter().zip(&self.chain_id) {
            out[c].push(row[p]);
        }
        out.retain(|c| !c.is_empty());
        out
    }

    /// The distribution at draw `i`.
    pub fn dist(&self, i: usize) -> Dist {
        Dist::new(self.family, &self.draws[i]).expect("draws are validated on construction")
    }

    pub fn dists(&self) -> impl Iterator<Item = Dist> + '_ {
        (0..self.len()).map(|i| self.dist(i))
    }
}

struct ChainOutput {
    thetas: Vec<Vec<f64>>,
    log_likelihood: Vec<f64>,
    acceptance: f64,
}

/// Draws from the posterior of `model` with adaptive random-walk Metropolis.
/// Chains run in parallel; each owns an RNG stream derived from
/// `(seed, chain_id)`, so the result is independent of scheduling.
pub fn sample_posterior(model: &ModelSpec, cfg: &SamplerConfig) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let outputs: Vec<Result<ChainOutput>> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| run_chain(model, cfg, chain))
        .collect();

    let total = cfg.chains * cfg.samples_per_chain;
    let mut draws = Vec::with_capacity(total);
    let mut chain_id = Vec::with_capacity(total);
    let mut log_likelihood = Vec::with_capacity(total);
    let mut chain_acceptance = Vec::with_capacity(cfg.chains);
    for (chain, out) in outputs.into_iter().enumerate() {
        let out = out?;
        chain_id.extend(std::iter::repeat_n(chain, out.thetas.len()));
        draws.extend(out.thetas);
        log_likelihood.extend(out.log_likelihood);
        chain_acceptance.push(out.acceptance);
    }
    let acceptance_rate = chain_acceptance.iter().sum::<f64>() / chain_acceptance.len() as f64;
    PosteriorDraws::new(
        model.family,
        draws,
        chain_id,
        log_likelihood,
        SamplerMeta {
            seed: cfg.seed,
            chains: cfg.chains,
            warmup: cfg.warmup,
            samples_per_chain: cfg.samples_per_chain,
            acceptance_rate,
            chain_acceptance,
        },
    )
}

fn run_chain(model: &ModelSpec, cfg: &SamplerConfig, chain: usize) -> Result<ChainOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let dim = model.dim();

    let mut eta: Vec<f64> = Vec::new();
    let mut current = None;
    for _ in 0..MAX_INIT_ATTEMPTS {
        eta = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let eval = model.evaluate(&eta);
        if eval.log_posterior.is_finite() {
            current = Some(eval);
            break;
        }
    }
    let Some(mut current) = current else {
        return Err(Error::Initialization {
            chain,
            eta,
            acceptance: 0.0,
        });
    };
    let start = eta.clone();

    let mut proposal = Proposal {
        chol: identity(dim),
        log_scale: cfg.initial_step_scale.ln(),
    };
    let windows = adaptation_windows(cfg.warmup);
    let mut window_draws: Vec<Vec<f64>> = Vec::new();
    let mut rm_step = 0usize;
    let mut accepted = 0usize;

    for it in 0..cfg.warmup {
        let (ok, alpha) = proposal.step(model, &mut rng, &mut eta, &mut current);
        accepted += usize::from(ok);
        rm_step += 1;
        proposal.log_scale += (rm_step as f64).powf(-0.6) * (alpha - cfg.target_acceptance);
        proposal.log_scale = proposal.log_scale.clamp(-30.0, 5.0);

        if let Some(&(_, end)) = windows.iter().find(|(s, e)| it >= *s && it < *e) {
            window_draws.push(eta.clone());
            if it + 1 == end {
                if let Some(chol) = cholesky(&regularized_covariance(&window_draws)) {
                    proposal.chol = chol;
                    proposal.log_scale = (2.38 / (dim as f64).sqrt()).ln();
                    rm_step = 0;
                }
                window_draws.clear();
            }
        }
    }
    let warmup_acceptance = accepted as f64 / cfg.warmup as f64;
    if warmup_acceptance < MIN_WARMUP_ACCEPTANCE {
        return Err(Error::Initialization {
            chain,
            eta: start,
            acceptance: warmup_acceptance,
        });
    }

    let mut thetas = Vec::with_capacity(cfg.samples_per_chain);
    let mut log_likelihood = Vec::with_capacity(cfg.samples_per_chain);
    let mut accepted = 0usize;
    for _ in 0..cfg.samples_per_chain {
        let (ok, _) = proposal.step(model, &mut rng, &mut eta, &mut current);
        accepted += usize::from(ok);
        thetas.push(current.theta.clone());
        log_likelihood.push(current.log_likelihood);
    }
    Ok(ChainOutput {
        thetas,
        log_likelihood,
        acceptance: accepted as f64 / cfg.samples_per_chain as f64,
    })
}

struct Proposal {
    chol: Vec<Vec<f64>>,
    log_scale: f64,
}

impl Proposal {
    /// One Metropolis step; returns whether the move was accepted and the
    /// acceptance probability.
    fn step(
        &self,
        model: &ModelSpec,
        rng: &mut ChaCha8Rng,
        eta: &mut Vec<f64>,
        current: &mut super::PointEval,
    ) -> (bool, f64) {
        let dim = eta.len();
        let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let scale = self.log_scale.exp();
        let candidate: Vec<f64> = (0..dim)
            .map(|i| eta[i] + scale * (0..=i).map(|j| self.chol[i][j] * z[j]).sum::<f64>())
            .collect();
        let eval = model.evaluate(&candidate);
        let log_ratio = eval.log_posterior - current.log_posterior;
        let alpha = if log_ratio.is_nan() {
            0.0
        } else {
            log_ratio.exp().min(1.0)
        };
        let u: f64 = rng.random();
        if u < alpha {
            *eta = candidate;
            *current = eval;
            (true, alpha)
        } else {
            (false, alpha)
        }
    }
}

/// Covariance adaptation windows `[start, end)` inside the warmup phase: a
/// 15% initial buffer, doubling windows starting at 25 iterations, and a 10%
/// terminal buffer where only the step size adapts.
fn adaptation_windows(warmup: usize) -> Vec<(usize, usize)> {
    if warmup < 20 {
        return Vec::new();
    }
    let (init, term, mut window) = if warmup >= 150 {
        (75.max(warmup * 15 / 100), 50.max(warmup / 10), 25)
    } else {
        (
            warmup * 15 / 100,
            warmup / 10,
            warmup - warmup * 15 / 100 - warmup / 10,
        )
    };
    let end_all = warmup - term;
    let mut windows = Vec::new();
    let mut start = init;
    while start < end_all {
        let mut end = (start + window).min(end_all);
        // Stretch the last window rather than leave a short remainder.
        if end_all - end < 2 * window {
            end = end_all;
        }
        windows.push((start, end));
        start = end;
        window *= 2;
    }
    windows
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Sample covariance shrunk towards `1e-3·I`, with weight 5 / (n + 5).
fn regularized_covariance(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len() as f64;
    let dim = points[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n)
        .collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for p in points {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1.0).max(1.0);
    let w = n / (n + 5.0);
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = w * *v / denom;
            if i == j {
                *v += 1e-3 * 5.0 / (n + 5.0);
            }
        }
    }
    cov
}

/// Lower-triangular Cholesky factor, or `None` if not positive definite.
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}
