//! Posterior-predictive queries, model scores and comparison.
//!
//! Scores are reported on the scale the model was fitted on (after the
//! observation's scale divisor); quantile and sample outputs are multiplied
//! back by a caller-supplied divisor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::inference::{
    diagnostics, Diagnostics, LikelihoodKind, ModelSpec, PosteriorDraws, SamplerMeta,
};
use crate::orderstats::QuantileObservation;

/// Lower and upper probability of every reported credible band.
pub const BAND: (f64, f64) = (0.05, 0.95);

/// Linear-interpolation sample quantile of already sorted data (R type 7).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Posterior-predictive CDF with pointwise credible band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveCurve {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// `P(X < x')` averaged over the posterior draws, with the 5% and 95% draw
/// quantiles of `F_θ(x')` as a band. `x_grid` is on the fitted scale.
pub fn predictive_cdf(pd: &PosteriorDraws, x_grid: &[f64]) -> Result<PredictiveCurve> {
    if x_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("x grid must be finite".into()));
    }
    let dists: Vec<_> = pd.dists().collect();
    let mut curve = PredictiveCurve {
        x: x_grid.to_vec(),
        mean: Vec::with_capacity(x_grid.len()),
        lower: Vec::with_capacity(x_grid.len()),
        upper: Vec::with_capacity(x_grid.len()),
    };
    let mut values = vec![0.0; dists.len()];
    for &x in x_grid {
        for (v, d) in values.iter_mut().zip(&dists) {
            *v = d.cdf_unchecked(x);
        }
        curve.mean.push(mean(&values));
        let sorted = sorted_copy(&values);
        curve.lower.push(empirical_quantile(&sorted, BAND.0));
        curve.upper.push(empirical_quantile(&sorted, BAND.1));
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveQuantile {
    pub p: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The `p`-quantile under each draw, summarized by its mean and 5%/95% draw
/// quantiles, then multiplied by `scale_divisor`.
pub fn predictive_quantile(
    pd: &PosteriorDraws,
    p: f64,
    scale_divisor: f64,
) -> Result<PredictiveQuantile> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} is not in (0, 1)")));
    }
    if !(scale_divisor > 0.0 && scale_divisor.is_finite()) {
        return Err(Error::Input(format!(
            "scale divisor must be positive, got {scale_divisor}"
        )));
    }
    let values = pd
        .dists()
        .map(|d| d.quantile(p))
        .collect::<Result<Vec<f64>>>()?;
    let sorted = sorted_copy(&values);
    Ok(PredictiveQuantile {
        p,
        mean: mean(&values) * scale_divisor,
        lower: empirical_quantile(&sorted, BAND.0) * scale_divisor,
        upper: empirical_quantile(&sorted, BAND.1) * scale_divisor,
    })
}

/// `n_per_draw` samples from every posterior draw, concatenated in draw
/// order and multiplied by `scale_divisor`.
pub fn predictive_sample<R: Rng + ?Sized>(
    pd: &PosteriorDraws,
    rng: &mut R,
    n_per_draw: usize,
    scale_divisor: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(pd.len() * n_per_draw);
    for d in pd.dists() {
        out.extend(
            d.sample(rng, n_per_draw)
                .into_iter()
                .map(|v| v * scale_divisor),
        );
    }
    out
}

/// Mean per-draw log-likelihood and its distances to the 5% and 95% draw
/// quantiles (`minus = mean - q05`, `plus = q95 - mean`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub mean: f64,
    pub plus: f64,
    pub minus: f64,
}

pub fn score_model(pd: &PosteriorDraws) -> Score {
    let ll = pd.log_likelihood();
    let m = mean(ll);
    let sorted = sorted_copy(ll);
    Score {
        mean: m,
        plus: empirical_quantile(&sorted, BAND.1) - m,
        minus: m - empirical_quantile(&sorted, BAND.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

fn summarize(name: &str, values: &[f64]) -> ParamSummary {
    let m = mean(values);
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let sorted = sorted_copy(values);
    ParamSummary {
        name: name.to_string(),
        mean: m,
        sd,
        q05: empirical_quantile(&sorted, 0.05),
        q50: empirical_quantile(&sorted, 0.5),
        q95: empirical_quantile(&sorted, 0.95),
    }
}

/// Everything reported about one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub likelihood: LikelihoodKind,
    /// Present only for the Gaussian-noise likelihood.
    pub sigma_noise: Option<f64>,
    pub observation: QuantileObservation,
    pub scale_divisor: f64,
    pub params: Vec<ParamSummary>,
    pub diagnostics: Diagnostics,
    pub score: Score,
    pub predictive_quantiles: Vec<PredictiveQuantile>,
    pub sampler: SamplerMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<PosteriorDraws>,
}

impl FitReport {
    /// Summarizes `pd` for `model`; predictive quantiles are computed for
    /// each level in `predict` and de-normalized by the observation's
    /// scale divisor.
    pub fn build(model: &ModelSpec, pd: &PosteriorDraws, predict: &[f64]) -> Result<Self> {
        let names = model.family.param_names();
        let params = (0..pd.n_params())
            .map(|p| summarize(names[p], &pd.column(p)))
            .collect();
        let divisor = model.obs.scale_divisor();
        let predictive_quantiles = predict
            .iter()
            .map(|&p| predictive_quantile(pd, p, divisor))
            .collect::<Result<Vec<_>>>()?;
        Ok(FitReport {
            family: model.family,
            likelihood: model.likelihood,
            sigma_noise: match model.likelihood {
                LikelihoodKind::GaussianNoise => Some(model.sigma_noise),
                LikelihoodKind::OrderStatistics => None,
            },
            observation: model.obs.clone(),
            scale_divisor: divisor,
            params,
            diagnostics: diagnostics(pd),
            score: score_model(pd),
            predictive_quantiles,
            sampler: pd.meta().clone(),
            draws: Some(pd.clone()),
        })
    }

    pub fn without_draws(mut self) -> Self {
        self.draws = None;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub family: Family,
    pub likelihood: LikelihoodKind,
    pub score: Score,
    pub best: bool,
}

/// Reports sorted by descending mean log-likelihood; the first is flagged
/// best. Ties are broken by family name.
pub fn compare_models(reports: &[FitReport]) -> Result<Vec<RankEntry>> {
    let Some(first) = reports.first() else {
        return Err(Error::Input("no reports to compare".into()));
    };
    if reports.iter().any(|r| r.observation != first.observation) {
        return Err(Error::ObservationMismatch);
    }
    let mut entries: Vec<RankEntry> = reports
        .iter()
        .map(|r| RankEntry {
            family: r.family,
            likelihood: r.likelihood,
            score: r.score,
            best: false,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.score
            .mean
            .total_cmp(&a.score.mean)
            .then_with(|| a.family.name().cmp(b.family.name()))
    });
    entries[0].best = true;
    Ok(entries)
}

/// Gaussian kernel density estimate with Silverman's bandwidth
/// `1.06·sd·n^(-1/5)`, evaluated on `grid`.
pub fn kde_curve(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Input("a KDE needs at least two samples".into()));
    }
    let n = samples.len() as f64;
    let m = mean(samples);
    let sd = (samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Input("samples have zero variance".into()));
    }
    let h = 1.06 * sd * n.powf(-0.2);
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect())
}
