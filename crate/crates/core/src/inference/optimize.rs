//! Derivative-free point estimates: MAP and the least-squares CDF fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{to_constrained, ModelSpec};
use crate::distributions::{Dist, Family};
use crate::error::{Error, Result};
use crate::orderstats::QuantileObservation;

const DIAMETER_TOL: f64 = 1e-8;
const MAX_ITER: usize = 20_000;
const MAX_START_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` with the Nelder-Mead simplex (reflection 1, expansion 2,
/// contraction ½, shrink ½) from an axis-aligned simplex of edge `step`.
/// Non-finite values are treated as `+inf`. Stops once every vertex is
/// within `DIAMETER_TOL` of the best one.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64) -> NelderMeadResult {
    let dim = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if diameter < DIAMETER_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = dim;
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..worst].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let towards = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst].0)
                .map(|(c, w)| c + coef * (w - c))
                .collect()
        };

        let reflected = towards(-1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = towards(-2.0);
            let fe = eval(&expanded);
            simplex[worst] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[worst - 1].1 {
            simplex[worst] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[worst].1 {
            let c = towards(-0.5);
            let v = eval(&c);
            (c, v)
        } else {
            let c = towards(0.5);
            let v = eval(&c);
            (c, v)
        };
        if fc < simplex[worst].1.min(fr) {
            simplex[worst] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = vertex
                .0
                .iter()
                .zip(&best)
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            let v = eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        converged,
    }
}

/// Runs Nelder-Mead until a fresh simplex around the optimum no longer
/// improves it, guarding against premature collapse.
fn polish<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64]) -> NelderMeadResult {
    let mut result = nelder_mead(f, x0, 1.0);
    for _ in 0..5 {
        let again = nelder_mead(f, &result.x, 0.05);
        let improved = again.value < result.value - 1e-12 * result.value.abs().max(1.0);
        let better = again.value <= result.value;
        if better {
            result = NelderMeadResult {
                iterations: result.iterations + again.iterations,
                ..again
            };
        }
        if !improved {
            break;
        }
    }
    result
}

/// Best minimum over `restarts` starts drawn from `N(0, I)`. A start is
/// redrawn (up to 100 times) while the objective is non-finite there.
fn minimize_with_restarts<F: Fn(&[f64]) -> f64>(
    f: &F,
    dim: usize,
    restarts: usize,
    seed: u64,
) -> Result<NelderMeadResult> {
    if restarts < 1 {
        return Err(Error::Input("restarts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<NelderMeadResult> = None;
    for _ in 0..restarts {
        let mut start = None;
        for _ in 0..MAX_START_ATTEMPTS {
            let x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            if f(&x).is_finite() {
                start = Some(x);
                break;
            }
        }
        let Some(start) = start else { continue };
        let result = polish(f, &start);
        if result.value.is_finite() && best.as_ref().is_none_or(|b| result.value < b.value) {
            best = Some(result);
        }
    }
    best.ok_or_else(|| {
        Error::Optimization("objective was non-finite at every initialization".into())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimate {
    pub theta: Vec<f64>,
    /// Log-likelihood plus log-prior at `theta`: the posterior density over
    /// the constrained parameters, without the reparameterization Jacobian.
    pub log_posterior: f64,
}

/// Maximum a-posteriori estimate. The search runs in the unconstrained
/// space, but the objective is the density over the natural parameters, so
/// the mode does not move with the choice of reparameterization.
pub fn map_estimate(model: &ModelSpec, restarts: usize, seed: u64) -> Result<MapEstimate> {
    let objective = |eta: &[f64]| -> f64 {
        let (theta, _) = to_constrained(model.family, eta);
        let lp = model.log_likelihood(&theta) + model.prior.log_density(&theta);
        -lp
    };
    let best = minimize_with_restarts(&objective, model.dim(), restarts, seed)?;
    let (theta, _) = to_constrained(model.family, &best.x);
    Ok(MapEstimate {
        theta,
        log_posterior: -best.value,
    })
}

/// Least-squares fit of the model CDF to the observed quantile levels,
/// `min Σ (q_m - F(x_m))²`.
pub fn mse_fit(
    family: Family,
    obs: &QuantileObservation,
    restarts: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let objective = |eta: &[f64]| -> f64 {
        let (theta, _) = to_constrained(family, eta);
        let Ok(d) = Dist::new(family, &theta) else {
            return f64::INFINITY;
        };
        obs.values()
            .iter()
            .zip(obs.q())
            .map(|(&x, &q)| (q - d.cdf_unchecked(x)).powi(2))
            .sum()
    };
    let best = minimize_with_restarts(&objective, family.arity(), restarts, seed)?;
    Ok(to_constrained(family, &best.x).0)
}
