//! Brute-force numerical oracles for the qmatch test suites.
//!
//! Nothing here calls into `qmatch`; every routine is a textbook method kept
//! deliberately simple so it can act as an independent check.

use std::f64::consts::PI;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

/// Seeds every stochastic suite is run under.
pub const SEEDS: [u64; 3] = [11, 23, 37];

/// Runs a property once per seed in [`SEEDS`], `cases` cases each, with
/// failure persistence off so results depend only on the seed.
pub fn check_property<S, F>(cases: u32, strategy: S, test: F)
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    for seed in SEEDS {
        let config = Config {
            cases,
            rng_seed: RngSeed::Fixed(seed),
            failure_persistence: None,
            ..Config::default()
        };
        let mut runner = TestRunner::new(config);
        if let Err(e) = runner.run(&strategy, &test) {
            panic!("property failed under seed {seed}: {e}");
        }
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, found by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule over `[a, b]` with `panels` equal panels.
pub fn gauss_legendre_integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    order: usize,
    panels: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        for (z, w) in nodes.iter().zip(&weights) {
            total += w * half * f(mid + half * z);
        }
    }
    total
}

/// Integrates `f(u_1, ..., u_dim)` over the ordered simplex
/// `0 < u_1 < ... < u_dim < 1` by nesting one-dimensional Gauss-Legendre
/// rules, innermost variable first.
pub fn ordered_simplex_integral<F: Fn(&[f64]) -> f64>(f: &F, dim: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mut point = vec![0.0; dim];
    nest(f, &nodes, &weights, &mut point, 0, 0.0)
}

fn nest<F: Fn(&[f64]) -> f64>(
    f: &F,
    nodes: &[f64],
    weights: &[f64],
    point: &mut Vec<f64>,
    level: usize,
    lower: f64,
) -> f64 {
    if level == point.len() {
        return f(point);
    }
    let half = 0.5 * (1.0 - lower);
    let mid = lower + half;
    let mut total = 0.0;
    for (z, w) in nodes.iter().zip(weights) {
        let u = mid + half * z;
        point[level] = u;
        total += w * half * nest(f, nodes, weights, point, level + 1, u);
    }
    total
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            let above = (i + 1) as f64 / n - c;
            let below = c - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Binomial tail `P(Bin(n, x) >= k)` by direct summation of the pmf with
/// integer arithmetic for the binomial coefficients.
pub fn binomial_upper_tail(n: u64, k: u64, x: f64) -> f64 {
    let mut total = 0.0;
    for i in k..=n {
        let mut coef = 1.0f64;
        for j in 0..i {
            coef = coef * (n - j) as f64 / (j + 1) as f64;
        }
        total += coef * x.powi(i as i32) * (1.0 - x).powi((n - i) as i32);
    }
    total
}

/// Spearman rank correlation (no tie correction).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom, integrated numerically from the density.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    let k = dof as f64 / 2.0;
    let log_norm = -(k * 2f64.ln()) - ln_gamma_stirling(k);
    let density = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            ((k - 1.0) * t.ln() - t / 2.0 + log_norm).exp()
        }
    };
    let upper = (stat + 60.0 * (dof as f64).sqrt() + 200.0).max(stat * 2.0);
    adaptive_simpson(&density, stat, upper, 1e-12).clamp(0.0, 1.0)
}

/// `ln Gamma(x)` via upward recurrence into the Stirling series.
pub fn ln_gamma_stirling(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 20.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    shift + (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// Central finite difference of `f` at `x` with step `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
