//! Order-statistic likelihood kernels, all in the log domain.
//!
//! The central object is the joint density of `M` order statistics of `N`
//! iid draws. For uniforms `u_1 < … < u_M` at (possibly non-integer) orders
//! `k_1 < … < k_M`,
//!
//! ```text
//! ln p(u) = ln c + (k_1 - 1) ln u_1 + (N - k_M) ln(1 - u_M)
//!         + Σ_{m≥2} (k_m - k_{m-1} - 1) ln(u_m - u_{m-1})
//! ln c    = ln Γ(N + 1) - ln Γ(k_1) - ln Γ(N - k_M + 1) - Σ_{m≥2} ln Γ(k_m - k_{m-1})
//! ```
//!
//! and a general continuous family is handled by substituting `u = F(x)`
//! and adding the Jacobian `Σ ln f(x_m)`.

use serde::{Deserialize, Serialize};

use crate::distributions::Dist;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_gamma_unchecked};

/// Lower clamp applied to CDF values (and their complements) before logs.
pub const CDF_FLOOR: f64 = 1e-300;

/// Noise level of the Gaussian-noise baseline when none is supplied.
pub const DEFAULT_SIGMA_NOISE: f64 = 0.05;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Observed quantile levels `q`, their empirical values `x`, and the sample
/// size `N` they were computed from.
///
/// `scale_divisor` rescales the values before any likelihood is evaluated
/// (for example, dividing salaries by their median); [`values`] returns the
/// rescaled vector and [`x`] the raw one.
///
/// [`values`]: QuantileObservation::values
/// [`x`]: QuantileObservation::x
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservation", into = "RawObservation")]
pub struct QuantileObservation {
    q: Vec<f64>,
    x: Vec<f64>,
    n_total: u64,
    scale_divisor: f64,
    scaled: Vec<f64>,
    log_norm_const: f64,
}

#[derive(Serialize, Deserialize)]
struct RawObservation {
    q: Vec<f64>,
    x: Vec<f64>,
    n_total: u64,
    #[serde(default = "one")]
    scale_divisor: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawObservation> for QuantileObservation {
    type Error = Error;

    fn try_from(raw: RawObservation) -> Result<Self> {
        QuantileObservation::new(raw.q, raw.x, raw.n_total)?.with_scale_divisor(raw.scale_divisor)
    }
}

impl From<QuantileObservation> for RawObservation {
    fn from(obs: QuantileObservation) -> Self {
        RawObservation {
            q: obs.q,
            x: obs.x,
            n_total: obs.n_total,
            scale_divisor: obs.scale_divisor,
        }
    }
}

impl QuantileObservation {
    pub fn new(q: Vec<f64>, x: Vec<f64>, n_total: u64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Input("at least one quantile is required".into()));
        }
        if q.len() != x.len() {
            return Err(Error::Input(format!(
                "q has {} entries but x has {}",
                q.len(),
                x.len()
            )));
        }
        if n_total == 0 {
            return Err(Error::Input("sample size N must be at least 1".into()));
        }
        for (i, &qi) in q.iter().enumerate() {
            if !(qi > 0.0 && qi < 1.0) {
                return Err(Error::Input(format!("q[{i}] = {qi} is not in (0, 1)")));
            }
            if i > 0 && qi <= q[i - 1] {
                return Err(Error::Input(format!(
                    "q must be strictly increasing: q[{}] = {} >= q[{i}] = {qi}",
                    i - 1,
                    q[i - 1]
                )));
            }
        }
        for (i, &xi) in x.iter().enumerate() {
            if !xi.is_finite() {
                return Err(Error::Input(format!("x[{i}] = {xi} is not finite")));
            }
            if i > 0 && xi <= x[i - 1] {
                return Err(Error::Input(format!(
                    "x must be strictly increasing (ties have zero density): x[{}] = {} >= x[{i}] = {xi}",
                    i - 1,
                    x[i - 1]
                )));
            }
        }
        let orders = OrderVector::from_levels(&q, n_total)?;
        let log_norm_const = log_norm_const(n_total, &orders)?;
        Ok(QuantileObservation {
            scaled: x.clone(),
            q,
            x,
            n_total,
            scale_divisor: 1.0,
            log_norm_const,
        })
    }

    pub fn with_scale_divisor(mut self, divisor: f64) -> Result<Self> {
        if !(divisor > 0.0 && divisor.is_finite()) {
            return Err(Error::Input(format!(
                "scale divisor must be positive, got {divisor}"
            )));
        }
        self.scale_divisor = divisor;
        self.scaled = self.x.iter().map(|v| v / divisor).collect();
        Ok(self)
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Raw quantile values as supplied.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Quantile values divided by the scale divisor; what the likelihoods see.
    pub fn values(&self) -> &[f64] {
        &self.scaled
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn scale_divisor(&self) -> f64 {
        self.scale_divisor
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn orders(&self) -> OrderVector {
        OrderVector {
            k: self.q.iter().map(|q| q * self.n_total as f64).collect(),
        }
    }

    /// Same levels and sample size with new values (same scale divisor).
    pub fn with_values(&self, x: Vec<f64>) -> Result<Self> {
        QuantileObservation::new(self.q.clone(), x, self.n_total)?
            .with_scale_divisor(self.scale_divisor)
    }

    /// Same levels and values with a different sample size.
    pub fn with_n_total(&self, n_total: u64) -> Result<Self> {
        QuantileObservation::new(self.q.clone(), self.x.clone(), n_total)?
            .with_scale_divisor(self.scale_divisor)
    }
}

/// Real-valued orders `k_m = q_m·N`, strictly increasing in `(0, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVector {
    k: Vec<f64>,
}

impl OrderVector {
    pub fn new(k: Vec<f64>, n: u64) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::Input("order vector is empty".into()));
        }
        let n = n as f64;
        if !(k[0] > 0.0) {
            return Err(Error::Domain(format!(
                "first order must be positive, got {}",
                k[0]
            )));
        }
        if !(k[k.len() - 1] <= n) {
            return Err(Error::Domain(format!(
                "last order {} exceeds the sample size {n}",
                k[k.len() - 1]
            )));
        }
        for m in 1..k.len() {
            if !(k[m] - k[m - 1] > 0.0) {
                return Err(Error::Domain(format!(
                    "orders must be strictly increasing (quantiles too close for N): k[{}] = {}, k[{m}] = {}",
                    m - 1,
                    k[m - 1],
                    k[m]
                )));
            }
        }
        Ok(OrderVector { k })
    }

    fn from_levels(q: &[f64], n: u64) -> Result<Self> {
        OrderVector::new(q.iter().map(|q| q * n as f64).collect(), n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// `P(U_(k) <= x)` for the `k`-th of `n` uniform order statistics: the
/// probability of at least `k` successes in `n` Bernoulli(x) trials.
pub fn uniform_os_cdf(n: u64, k: u64, x: f64) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::Domain(format!("order k = {k} must lie in 1..={n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} is not in [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    let ln_n_fact = ln_gamma_unchecked(n as f64 + 1.0);
    let log_terms: Vec<f64> = (k..=n)
        .map(|i| {
            let i_f = i as f64;
            ln_n_fact - ln_gamma_unchecked(i_f + 1.0) - ln_gamma_unchecked((n - i) as f64 + 1.0)
                + i_f * lx
                + (n - i) as f64 * l1x
        })
        .collect();
    Ok(log_sum_exp(&log_terms).exp().min(1.0))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Log density of the `k`-th of `n` uniform order statistics,
/// `Beta(k, n - k + 1)`; `k` may be non-integer. `-inf` outside `(0, 1)`.
pub fn uniform_os_logpdf(n: u64, k: f64, x: f64) -> Result<f64> {
    check_single_order(n, k)?;
    if !(x > 0.0 && x < 1.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let n = n as f64;
    let log_beta =
        ln_gamma_unchecked(k) + ln_gamma_unchecked(n - k + 1.0) - ln_gamma_unchecked(n + 1.0);
    Ok((k - 1.0) * x.ln() + (n - k) * (-x).ln_1p() - log_beta)
}

fn check_single_order(n: u64, k: f64) -> Result<()> {
    if !(k > 0.0 && k <= n as f64) {
        return Err(Error::Domain(format!("order k = {k} must lie in (0, {n}]")));
    }
    Ok(())
}

/// Log density of the `k`-th order statistic of `n` draws from `d`,
/// evaluated at `x`.
pub fn os_logpdf(d: &Dist, n: u64, k: f64, x: f64) -> Result<f64> {
    check_single_order(n, k)?;
    let log_f = d.log_pdf(x)?;
    if log_f == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let (c, s) = d.tails(x);
    let n_f = n as f64;
    let log_beta =
        ln_gamma_unchecked(k) + ln_gamma_unchecked(n_f - k + 1.0) - ln_gamma_unchecked(n_f + 1.0);
    Ok(xlogy(k - 1.0, c.max(CDF_FLOOR)) + xlogy(n_f - k, s.max(CDF_FLOOR)) - log_beta + log_f)
}

/// `ln c` for the joint uniform order-statistic density, with factorials
/// generalized through `ln Γ` so non-integer orders are supported.
pub fn log_norm_const(n: u64, k: &OrderVector) -> Result<f64> {
    let k = k.as_slice();
    let n_f = n as f64;
    let last = k[k.len() - 1];
    let mut c = ln_gamma(n_f + 1.0)? - ln_gamma(k[0])? - ln_gamma(n_f - last + 1.0)?;
    for w in k.windows(2) {
        let gap = w[1] - w[0];
        if !(gap > 0.0) {
            return Err(Error::Domain(format!(
                "consecutive orders {} and {} are not strictly increasing",
                w[0], w[1]
            )));
        }
        c -= ln_gamma(gap)?;
    }
    Ok(c)
}

/// Joint log density of uniform order statistics at orders `k` evaluated at
/// `u`. Non-increasing `u` (or `u` outside `[0, 1]`) has zero density.
pub fn joint_uniform_os_logpdf(n: u64, k: &OrderVector, u: &[f64]) -> Result<f64> {
    let orders = k.as_slice();
    if u.len() != orders.len() {
        return Err(Error::Input(format!(
            "u has {} entries but there are {} orders",
            u.len(),
            orders.len()
        )));
    }
    if u.iter().any(|v| !(0.0..=1.0).contains(v)) || u.windows(2).any(|w| w[1] <= w[0]) {
        return Ok(f64::NEG_INFINITY);
    }
    let m = orders.len();
    let n_f = n as f64;
    let mut total = log_norm_const(n, k)?;
    total += boundary_term(orders[0] - 1.0, u[0])?;
    total += boundary_term(n_f - orders[m - 1], 1.0 - u[m - 1])?;
    for i in 1..m {
        total += boundary_term(orders[i] - orders[i - 1] - 1.0, u[i] - u[i - 1])?;
    }
    Ok(total)
}

/// `exponent · ln(v)` for `v >= 0`, rejecting the unbounded `0^negative`.
fn boundary_term(exponent: f64, v: f64) -> Result<f64> {
    if v > 0.0 {
        return Ok(xlogy(exponent, v));
    }
    if exponent > 0.0 {
        Ok(f64::NEG_INFINITY)
    } else if exponent == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!(
            "density is unbounded: zero spacing with exponent {exponent}"
        )))
    }
}

fn xlogy(c: f64, v: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * v.ln()
    }
}

/// Value of the joint order-statistics log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLik {
    pub value: f64,
    /// Set when two CDF values coincided at machine precision, i.e. the
    /// parameters misfit the data so badly that the spacing underflowed.
    pub degenerate: bool,
}

/// Joint log-likelihood of the observed quantile values under `d`,
/// treating `x_m` as the order statistic of rank `q_m·N`.
pub fn joint_os_loglik(d: &Dist, obs: &QuantileObservation) -> LogLik {
    let x = obs.values();
    let q = obs.q();
    let n = obs.n_total() as f64;
    let m = x.len();

    let mut total = obs.log_norm_const;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..m {
        let log_f = d.log_pdf_unchecked(x[i]);
        if log_f == f64::NEG_INFINITY {
            return LogLik {
                value: f64::NEG_INFINITY,
                degenerate: false,
            };
        }
        total += log_f;
        let (c, s) = d.tails(x[i]);
        let k = q[i] * n;
        match prev {
            None => total += xlogy(k - 1.0, c.max(CDF_FLOOR)),
            Some((pc, ps)) => {
                let spacing = if pc > 0.5 { ps - s } else { c - pc };
                if !(spacing > 0.0) {
                    return LogLik {
                        value: f64::NEG_INFINITY,
                        degenerate: true,
                    };
                }
                let k_prev = q[i - 1] * n;
                total += xlogy(k - k_prev - 1.0, spacing);
            }
        }
        if i == m - 1 {
            total += xlogy(n - k, s.max(CDF_FLOOR));
        }
        prev = Some((c, s));
    }
    if total.is_nan() {
        return LogLik {
            value: f64::NEG_INFINITY,
            degenerate: true,
        };
    }
    LogLik {
        value: total,
        degenerate: false,
    }
}

/// Gaussian-noise baseline: `Σ_m ln N(q_m | F(x_m), σ²)`.
pub fn gaussian_noise_loglik(d: &Dist, obs: &QuantileObservation, sigma_noise: f64) -> Result<f64> {
    if !(sigma_noise > 0.0 && sigma_noise.is_finite()) {
        return Err(Error::Input(format!(
            "sigma_noise must be positive, got {sigma_noise}"
        )));
    }
    Ok(gaussian_noise_loglik_unchecked(d, obs, sigma_noise))
}

pub(crate) fn gaussian_noise_loglik_unchecked(
    d: &Dist,
    obs: &QuantileObservation,
    sigma_noise: f64,
) -> f64 {
    let log_norm = -LN_SQRT_2PI - sigma_noise.ln();
    obs.values()
        .iter()
        .zip(obs.q())
        .map(|(&x, &q)| {
            let r = (q - d.cdf_unchecked(x)) / sigma_noise;
            log_norm - 0.5 * r * r
        })
        .sum()
}

/// Both penalty curves over an x grid, each scaled so its maximum is 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyCurves {
    pub x: Vec<f64>,
    pub os: Vec<f64>,
    pub gn: Vec<f64>,
}

/// Likelihood of a single quantile value `x` at level `q` as a function of
/// `x`, under the order-statistics model (`F^{qN-1} (1-F)^{N-qN} f`) and the
/// Gaussian-noise model (`exp(-(F - q)² / 2σ²)`).
pub fn penalty_curves(
    d: &Dist,
    q: f64,
    n: u64,
    x_grid: &[f64],
    sigma_noise: f64,
) -> Result<PenaltyCurves> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q = {q} is not in (0, 1)")));
    }
    if !(sigma_noise > 0.0) {
        return Err(Error::Input(format!(
            "sigma_noise must be positive, got {sigma_noise}"
        )));
    }
    if x_grid.iter().any(|x| !x.is_finite()) || x_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Input("x grid must be finite and sorted".into()));
    }
    let k = q * n as f64;
    let n_f = n as f64;
    let mut log_os = Vec::with_capacity(x_grid.len());
    let mut log_gn = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let (c, s) = d.tails(x);
        let log_f = d.log_pdf_unchecked(x);
        log_os.push(if log_f == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            xlogy(k - 1.0, c.max(CDF_FLOOR)) + xlogy(n_f - k, s.max(CDF_FLOOR)) + log_f
        });
        let r = (c - q) / sigma_noise;
        log_gn.push(-0.5 * r * r);
    }
    Ok(PenaltyCurves {
        x: x_grid.to_vec(),
        os: normalize_max(&log_os),
        gn: normalize_max(&log_gn),
    })
}

fn normalize_max(log_values: &[f64]) -> Vec<f64> {
    let max = log_values
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![0.0; log_values.len()];
    }
    log_values.iter().map(|v| (v - max).exp()).collect()
}
