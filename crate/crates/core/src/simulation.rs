//! Synthetic quantile data and Monte-Carlo reference distributions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::Dist;
use crate::error::{Error, Result};
use crate::orderstats::QuantileObservation;

/// Draw `n` samples from `dist`, sort them and read off the quantiles at
/// levels `q`, once per repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dist: Dist,
    pub n: u64,
    pub q: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

/// Rng for repetition `rep`: independent streams of one seed.
fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Quantile of sorted data at rank `q·N` (1-based), linearly interpolated
/// between neighbouring order statistics.
fn rank_quantile(sorted: &[f64], q: f64) -> Result<f64> {
    let rank = q * sorted.len() as f64;
    if !(rank >= 1.0 && rank <= sorted.len() as f64) {
        return Err(Error::Input(format!(
            "level {q} gives rank {rank}, outside [1, {}]",
            sorted.len()
        )));
    }
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    let below = sorted[lo - 1];
    if frac == 0.0 || lo == sorted.len() {
        return Ok(below);
    }
    Ok(below + frac * (sorted[lo] - below))
}

/// One observation per repetition. Each repetition uses its own stream of
/// `cfg.seed`, so results do not depend on how many are requested.
pub fn simulate_quantile_data(cfg: &SimConfig) -> Result<Vec<QuantileObservation>> {
    if cfg.n == 0 || cfg.reps == 0 {
        return Err(Error::Input("N and reps must be positive".into()));
    }
    let n = usize::try_from(cfg.n).map_err(|_| Error::Input("N is too large".into()))?;
    for &q in &cfg.q {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level {q} is not in (0, 1)"
            )));
        }
        if q * (n as f64) < 1.0 {
            return Err(Error::Input(format!(
                "level {q} gives rank below 1 for N = {n}"
            )));
        }
    }
    (0..cfg.reps)
        .map(|rep| {
            let mut rng = rep_rng(cfg.seed, rep);
            let mut xs = cfg.dist.sample(&mut rng, n);
            xs.sort_by(f64::total_cmp);
            let x = cfg
                .q
                .iter()
                .map(|&q| rank_quantile(&xs, q))
                .collect::<Result<Vec<_>>>()?;
            QuantileObservation::new(cfg.q.clone(), x, cfg.n)
        })
        .collect()
}

/// Empirical CDFs of `reps` independent samples of size `n`: each row holds
/// the sorted sample, paired with the rank grid `m/N`, `m = 1..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfEnsemble {
    pub levels: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
}

pub fn empirical_cdf_ensemble(
    dist: &Dist,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<CdfEnsemble> {
    if n == 0 {
        return Err(Error::Input("N must be positive".into()));
    }
    let levels = (1..=n).map(|m| m as f64 / n as f64).collect();
    let samples = (0..reps)
        .map(|rep| {
            let mut rng = rep_rng(seed, rep);
            let mut xs = dist.sample(&mut rng, n);
            xs.sort_by(f64::total_cmp);
            xs
        })
        .collect();
    Ok(CdfEnsemble { levels, samples })
}

/// `reps` draws of the `k`-th smallest of `n` samples from `dist`, for
/// checking the analytic order-statistic marginals.
pub fn os_marginal_oracle(
    dist: &Dist,
    n: usize,
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("order {k} is not in [1, {n}]")));
    }
    Ok((0..reps)
        .map(|rep| {
            let mut rng = rep_rng(seed, rep);
            let mut xs = dist.sample(&mut rng, n);
            xs.select_nth_unstable_by(k - 1, f64::total_cmp);
            xs[k - 1]
        })
        .collect())
}
