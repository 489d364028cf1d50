//! Convergence diagnostics: split-R̂ and effective sample size.

use serde::{Deserialize, Serialize};

use super::PosteriorDraws;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    /// `None` when fewer than two chains are available.
    pub rhat: Option<f64>,
    pub ess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub params: Vec<ParamDiagnostics>,
}

impl Diagnostics {
    /// Largest R̂ over parameters, if any was computable.
    pub fn max_rhat(&self) -> Option<f64> {
        self.params
            .iter()
            .filter_map(|p| p.rhat)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// True when every parameter has an R̂ below `threshold`.
    pub fn converged(&self, threshold: f64) -> bool {
        self.params
            .iter()
            .all(|p| p.rhat.is_some_and(|r| r < threshold))
    }
}

pub fn diagnostics(pd: &PosteriorDraws) -> Diagnostics {
    let names = pd.family().param_names();
    Diagnostics {
        params: (0..pd.n_params())
            .map(|p| {
                let chains = pd.chains(p);
                ParamDiagnostics {
                    name: names[p].to_string(),
                    rhat: split_rhat(&chains),
                    ess: effective_sample_size(&chains),
                }
            })
            .collect(),
    }
}

/// Classic split-R̂: each chain is cut in half and the between/within
/// variance ratio is formed over the halves.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    if chains.len() < 2 {
        return None;
    }
    let half = chains.iter().map(Vec::len).min()? / 2;
    if half < 2 {
        return None;
    }
    let mut pieces: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        pieces.push(&c[..half]);
        pieces.push(&c[c.len() - half..]);
    }
    let n = half as f64;
    let m = pieces.len() as f64;
    let means: Vec<f64> = pieces.iter().map(|p| p.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = n / (m - 1.0) * means.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    let within = pieces
        .iter()
        .zip(&means)
        .map(|(p, mu)| p.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if within == 0.0 {
        return if between == 0.0 {
            Some(1.0)
        } else {
            Some(f64::INFINITY)
        };
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    Some((var_plus / within).sqrt())
}

/// Effective sample size from the multi-chain autocorrelation estimate,
/// truncated by Geyer's initial positive sequence.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let m = chains.len();
    if n < 4 {
        return (n * m) as f64;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / nf).collect();
    let autocov = |t: usize| -> f64 {
        chains
            .iter()
            .zip(&means)
            .map(|(c, mu)| {
                (0..n - t)
                    .map(|i| (c[i] - mu) * (c[i + t] - mu))
                    .sum::<f64>()
                    / nf
            })
            .sum::<f64>()
            / m as f64
    };
    let acov0 = autocov(0);
    let within = acov0 * nf / (nf - 1.0);
    let between_over_n = if m > 1 {
        let grand = means.iter().sum::<f64>() / m as f64;
        means.iter().map(|v| (v - grand).powi(2)).sum::<f64>() / (m as f64 - 1.0)
    } else {
        0.0
    };
    let var_plus = within * (nf - 1.0) / nf + between_over_n;
    if var_plus <= 0.0 {
        return (n * m) as f64;
    }
    let rho = |t: usize| 1.0 - (within - autocov(t)) / var_plus;

    let mut sum_pairs = 0.0;
    let mut t = 0;
    while t + 1 < n {
        let pair = if t == 0 {
            1.0 + rho(1)
        } else {
            rho(t) + rho(t + 1)
        };
        if pair <= 0.0 {
            break;
        }
        sum_pairs += pair;
        t += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / (nf * m as f64).log10().max(1.0));
    (nf * m as f64) / tau
}
