//! Command-line arguments and the command implementations.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qmatch::inference::{sample_posterior, LikelihoodKind, ModelSpec, SamplerConfig};
use qmatch::orderstats::{penalty_curves, QuantileObservation, DEFAULT_SIGMA_NOISE};
use qmatch::predictive::{compare_models, predictive_cdf, predictive_quantile, FitReport};
use qmatch::simulation::{empirical_cdf_ensemble, simulate_quantile_data, SimConfig};
use qmatch::{Dist, Family};

use crate::dataset::{fmt_num, format_dataset, read_dataset, Overrides};
use crate::report::{
    read_report, to_json, write_atomic, CompareFile, FitFailure, FitFile, ReportFile,
};

/// Largest R-hat accepted without a convergence warning.
pub const RHAT_THRESHOLD: f64 = 1.05;

/// How a command that did not fail finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Warnings,
}

#[derive(Debug, Parser)]
#[command(
    name = "qmatch",
    version,
    about = "Fit parametric distributions to a handful of empirical quantiles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the posterior of one family and write a fit report.
    Fit(FitArgs),
    /// Fit several families to one dataset and rank them.
    Compare(CompareArgs),
    /// Posterior-predictive quantiles from a report with embedded draws.
    Predict(PredictArgs),
    /// Generate a synthetic dataset by sampling and sorting.
    Simulate(SimulateArgs),
    /// Write plot-ready curves as CSV.
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LikelihoodArg {
    /// Joint order-statistics likelihood.
    Os,
    /// Gaussian noise on the quantile levels.
    Gn,
}

impl From<LikelihoodArg> for LikelihoodKind {
    fn from(l: LikelihoodArg) -> Self {
        match l {
            LikelihoodArg::Os => LikelihoodKind::OrderStatistics,
            LikelihoodArg::Gn => LikelihoodKind::GaussianNoise,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with header `q,x`.
    pub data: PathBuf,
    /// Sample size behind the quantiles (overrides `# meta: N=`).
    #[arg(long = "n")]
    pub n_total: Option<u64>,
    /// Divide all values by this before fitting (overrides the meta line).
    #[arg(long)]
    pub scale_divisor: Option<f64>,
}

impl DataArgs {
    fn load(&self) -> Result<QuantileObservation> {
        read_dataset(
            &self.data,
            Overrides {
                n_total: self.n_total,
                scale_divisor: self.scale_divisor,
            },
        )
    }
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long, value_enum, default_value = "os")]
    pub likelihood: LikelihoodArg,
    /// Noise level of the Gaussian-noise likelihood.
    #[arg(long, default_value_t = DEFAULT_SIGMA_NOISE)]
    pub sigma_noise: f64,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Retained draws per chain.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    #[arg(long, env = "QMATCH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Leave the posterior draws out of the report.
    #[arg(long)]
    pub no_draws: bool,
}

impl SamplerArgs {
    fn config(&self) -> SamplerConfig {
        SamplerConfig {
            chains: self.chains,
            warmup: self.warmup,
            samples_per_chain: self.samples,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }

    fn model(&self, family: Family, obs: QuantileObservation) -> Result<ModelSpec> {
        Ok(match self.likelihood {
            LikelihoodArg::Os => ModelSpec::order_statistics(family, obs),
            LikelihoodArg::Gn => ModelSpec::gaussian_noise(family, obs, self.sigma_noise)?,
        })
    }

    fn fit(&self, family: Family, obs: &QuantileObservation, predict: &[f64]) -> Result<FitReport> {
        let model = self.model(family, obs.clone())?;
        let pd = sample_posterior(&model, &self.config())?;
        let report = FitReport::build(&model, &pd, predict)?;
        Ok(if self.no_draws {
            report.without_draws()
        } else {
            report
        })
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Predictive quantile levels to include in the report.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.99")]
    pub predict: Vec<f64>,
    /// Report path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated families, or `all` for the seven positive-support
    /// families weibull, lognormal, gamma, inv_gamma, frechet, chi_square
    /// and exponential.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub families: Vec<String>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.99")]
    pub predict: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Fit or compare report with embedded draws.
    pub report: PathBuf,
    /// Quantile levels in (0, 1).
    #[arg(long = "p", value_delimiter = ',', default_value = "0.99")]
    pub p: Vec<f64>,
    /// Multiply results by this instead of the report's scale divisor.
    #[arg(long)]
    pub divisor: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_family)]
    pub dist: Family,
    /// Comma-separated parameters of the generating distribution.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub params: Vec<f64>,
    /// Hidden sample size.
    #[arg(long = "n")]
    pub n_total: u64,
    /// Comma-separated levels, or `a:b:M` for M equidistant levels from a
    /// to b inclusive.
    #[arg(long, default_value = "0.05:0.95:10")]
    pub quantiles: String,
    #[arg(long, env = "QMATCH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveMode {
    /// Normalized likelihood of one quantile value under both models.
    Penalty,
    /// Posterior-predictive CDF of fitted reports.
    Predictive,
    /// Sorted samples of repeated draws, one row per repetition.
    Ensemble,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, value_enum)]
    pub mode: CurveMode,
    /// Distribution for penalty and ensemble modes [default: normal].
    #[arg(long, value_parser = parse_family)]
    pub dist: Option<Family>,
    /// Its parameters [default: 0,1].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    /// Sample size [default: 1000 for penalty, 20 for ensemble].
    #[arg(long = "n")]
    pub n_total: Option<u64>,
    /// Penalty mode: quantile levels [default: 0.1,0.01,0.001].
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Penalty mode: Gaussian-noise sigma [default: 0.05].
    #[arg(long)]
    pub sigma_noise: Option<f64>,
    /// Predictive mode: fit reports to evaluate (repeatable).
    #[arg(long)]
    pub report: Vec<PathBuf>,
    /// Ensemble mode: number of repetitions [default: 100].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Ensemble mode seed.
    #[arg(long, env = "QMATCH_SEED")]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Grid points between x-min and x-max.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Sends command output to `--out` atomically, or to standard output.
fn emit(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => stdout
            .write_all(bytes)
            .context("cannot write to standard output"),
    }
}

/// Parses `a:b:M` or a comma-separated list of quantile levels.
pub fn parse_levels(spec: &str) -> Result<Vec<f64>> {
    let levels = if let Some((a, rest)) = spec.split_once(':') {
        let (b, m) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("quantile range must look like a:b:M, got `{spec}`"))?;
        let a: f64 = a
            .trim()
            .parse()
            .with_context(|| format!("bad start in `{spec}`"))?;
        let b: f64 = b
            .trim()
            .parse()
            .with_context(|| format!("bad end in `{spec}`"))?;
        let m: usize = m
            .trim()
            .parse()
            .with_context(|| format!("bad count in `{spec}`"))?;
        match m {
            0 => bail!("quantile range `{spec}` has no points"),
            1 if a == b => vec![a],
            1 => bail!("a single point needs a == b in `{spec}`"),
            // Rounded to 12 decimals so 0.1:0.9:5 yields 0.3, not 0.30000000000000004.
            _ => (0..m)
                .map(|i| {
                    let v = a + (b - a) * i as f64 / (m - 1) as f64;
                    (v * 1e12).round() / 1e12
                })
                .collect(),
        }
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad level `{s}`"))
            })
            .collect::<Result<Vec<_>>>()?
    };
    for &q in &levels {
        if !(q > 0.0 && q < 1.0) {
            bail!("quantile level {q} is not in (0, 1)");
        }
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        bail!("quantile levels must be strictly increasing");
    }
    Ok(levels)
}

fn check_levels(levels: &[f64]) -> Result<()> {
    for &p in levels {
        if !(p > 0.0 && p < 1.0) {
            bail!("level {p} is not in (0, 1)");
        }
    }
    Ok(())
}

fn summary_line(report: &FitReport) -> String {
    let rhat = report
        .diagnostics
        .max_rhat()
        .map_or_else(|| "n/a".to_string(), |r| format!("{r:.3}"));
    format!(
        "{} ({}): mean log-likelihood {:.2} (+{:.2}/-{:.2}), max R-hat {rhat}",
        report.family,
        report.likelihood.name(),
        report.score.mean,
        report.score.plus,
        report.score.minus,
    )
}

pub fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status> {
    check_levels(&args.predict)?;
    let obs = args.data.load()?;
    let report = args.sampler.fit(args.family, &obs, &args.predict)?;
    let converged = report.diagnostics.converged(RHAT_THRESHOLD);
    writeln!(stderr, "{}", summary_line(&report))?;
    let file = ReportFile::Fit(FitFile {
        dataset: args.data.data.display().to_string(),
        report,
    });
    emit(&to_json(&file)?, args.out.as_deref(), stdout)?;
    if converged {
        Ok(Status::Success)
    } else {
        writeln!(
            stderr,
            "warning: R-hat is not below {RHAT_THRESHOLD} for every parameter"
        )?;
        Ok(Status::Warnings)
    }
}

fn parse_families(names: &[String]) -> Result<Vec<Family>> {
    if names.len() == 1 && names[0].trim() == "all" {
        return Ok(Family::SALARY_CANDIDATES.to_vec());
    }
    let mut families = Vec::new();
    for name in names {
        let f: Family = name.parse()?;
        if !families.contains(&f) {
            families.push(f);
        }
    }
    if families.is_empty() {
        bail!("no families given");
    }
    Ok(families)
}

pub fn cmd_compare(
    args: &CompareArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Status> {
    check_levels(&args.predict)?;
    let families = parse_families(&args.families)?;
    let obs = args.data.load()?;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for family in families {
        match args.sampler.fit(family, &obs, &args.predict) {
            Ok(r) => {
                writeln!(stderr, "{}", summary_line(&r))?;
                reports.push(r);
            }
            Err(e) => {
                writeln!(stderr, "{family}: fit failed: {e:#}")?;
                failures.push(FitFailure {
                    family,
                    error: format!("{e:#}"),
                });
            }
        }
    }
    if reports.is_empty() {
        bail!("every family failed to fit");
    }
    let ranking = compare_models(&reports)?;
    writeln!(stderr, "best: {}", ranking[0].family)?;
    let unconverged: Vec<String> = reports
        .iter()
        .filter(|r| !r.diagnostics.converged(RHAT_THRESHOLD))
        .map(|r| r.family.to_string())
        .collect();
    let file = ReportFile::Compare(CompareFile {
        dataset: args.data.data.display().to_string(),
        likelihood: args.sampler.likelihood.into(),
        ranking,
        failures,
        reports,
    });
    emit(&to_json(&file)?, args.out.as_deref(), stdout)?;
    let had_failures = matches!(&file, ReportFile::Compare(c) if !c.failures.is_empty());
    if !unconverged.is_empty() {
        writeln!(
            stderr,
            "warning: R-hat is not below {RHAT_THRESHOLD} for: {}",
            unconverged.join(", ")
        )?;
    }
    Ok(if had_failures || !unconverged.is_empty() {
        Status::Warnings
    } else {
        Status::Success
    })
}

pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write) -> Result<Status> {
    check_levels(&args.p)?;
    let file = read_report(&args.report)?;
    let report = file
        .primary_fit()
        .ok_or_else(|| anyhow!("report contains no fitted model"))?;
    let draws = report
        .draws
        .as_ref()
        .ok_or_else(|| anyhow!("report has no embedded draws; refit without --no-draws"))?;
    let divisor = args.divisor.unwrap_or(report.scale_divisor);
    let mut out = String::from("p,mean,lower,upper\n");
    for &p in &args.p {
        let q = predictive_quantile(draws, p, divisor)?;
        let row = [q.p, q.mean, q.lower, q.upper].map(fmt_num);
        writeln!(out, "{}", row.join(","))?;
    }
    emit(out.as_bytes(), args.out.as_deref(), stdout)?;
    Ok(Status::Success)
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<Status> {
    let dist = Dist::new(args.dist, &args.params)?;
    let q = parse_levels(&args.quantiles)?;
    let cfg = SimConfig {
        dist,
        n: args.n_total,
        q,
        reps: 1,
        seed: args.seed,
    };
    let obs = simulate_quantile_data(&cfg)?.remove(0);
    let params: Vec<String> = args.params.iter().copied().map(fmt_num).collect();
    let text = format!(
        "# simulated from {}({}), seed {}\n{}",
        args.dist,
        params.join(", "),
        args.seed,
        format_dataset(&obs)
    );
    emit(text.as_bytes(), args.out.as_deref(), stdout)?;
    Ok(Status::Success)
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!("--x-min must be below --x-max (got {lo} and {hi})");
    }
    if points < 2 {
        bail!("--points must be at least 2");
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

impl CurvesArgs {
    /// Rejects flags that have no meaning in the selected mode.
    fn check_flags(&self) -> Result<()> {
        let mut stray = Vec::new();
        let mode = self.mode;
        let penalty = mode == CurveMode::Penalty;
        let predictive = mode == CurveMode::Predictive;
        let ensemble = mode == CurveMode::Ensemble;
        if predictive && self.dist.is_some() {
            stray.push("--dist");
        }
        if predictive && self.params.is_some() {
            stray.push("--params");
        }
        if predictive && self.n_total.is_some() {
            stray.push("--n");
        }
        if !penalty && self.q.is_some() {
            stray.push("--q");
        }
        if !penalty && self.sigma_noise.is_some() {
            stray.push("--sigma-noise");
        }
        if !predictive && !self.report.is_empty() {
            stray.push("--report");
        }
        if !ensemble && self.reps.is_some() {
            stray.push("--reps");
        }
        if ensemble && (self.x_min.is_some() || self.x_max.is_some() || self.points.is_some()) {
            stray.push("--x-min/--x-max/--points");
        }
        if predictive && self.report.is_empty() {
            bail!("predictive mode needs at least one --report");
        }
        if !stray.is_empty() {
            let name = mode.to_possible_value().map(|v| v.get_name().to_string());
            bail!(
                "{} cannot be used in {} mode",
                stray.join(", "),
                name.unwrap_or_default()
            );
        }
        Ok(())
    }

    fn dist(&self) -> Result<Dist> {
        let family = self.dist.unwrap_or(Family::Normal);
        match &self.params {
            Some(p) => Ok(Dist::new(family, p)?),
            None if family == Family::Normal => Ok(Dist::normal(0.0, 1.0)?),
            None => bail!("--params is required for --dist {family}"),
        }
    }
}

pub fn cmd_curves(args: &CurvesArgs, stdout: &mut dyn Write) -> Result<Status> {
    args.check_flags()?;
    let mut out = String::new();
    match args.mode {
        CurveMode::Penalty => {
            let d = args.dist()?;
            let n = args.n_total.unwrap_or(1000);
            let levels = args.q.clone().unwrap_or_else(|| vec![0.1, 0.01, 0.001]);
            let sigma = args.sigma_noise.unwrap_or(DEFAULT_SIGMA_NOISE);
            let lo = args.x_min.map_or_else(|| d.quantile(1e-5), Ok)?;
            let hi = args.x_max.map_or_else(|| d.quantile(1.0 - 1e-5), Ok)?;
            let xs = grid(lo, hi, args.points.unwrap_or(1001))?;
            out.push_str("q,x,os,gn\n");
            for &q in &levels {
                let c = penalty_curves(&d, q, n, &xs, sigma)?;
                for ((x, os), gn) in c.x.iter().zip(&c.os).zip(&c.gn) {
                    let row = [q, *x, *os, *gn].map(fmt_num);
                    writeln!(out, "{}", row.join(","))?;
                }
            }
        }
        CurveMode::Predictive => {
            out.push_str("dataset,family,x,value,mean,lower,upper\n");
            for path in &args.report {
                let file = read_report(path)?;
                let (dataset, report) = match &file {
                    ReportFile::Fit(f) => (f.dataset.as_str(), &f.report),
                    ReportFile::Compare(c) => (
                        c.dataset.as_str(),
                        file.primary_fit()
                            .ok_or_else(|| anyhow!("{}: no fitted model", path.display()))?,
                    ),
                };
                let draws = report
                    .draws
                    .as_ref()
                    .ok_or_else(|| anyhow!("{}: report has no embedded draws", path.display()))?;
                let lo = match args.x_min {
                    Some(v) => v,
                    None => predictive_quantile(draws, 0.001, 1.0)?.mean,
                };
                let hi = match args.x_max {
                    Some(v) => v,
                    None => predictive_quantile(draws, 0.999, 1.0)?.mean,
                };
                let xs = grid(lo, hi, args.points.unwrap_or(501))?;
                let curve = predictive_cdf(draws, &xs)?;
                for (i, &x) in curve.x.iter().enumerate() {
                    let row = [
                        x,
                        x * report.scale_divisor,
                        curve.mean[i],
                        curve.lower[i],
                        curve.upper[i],
                    ]
                    .map(fmt_num);
                    writeln!(out, "{dataset},{},{}", report.family, row.join(","))?;
                }
            }
        }
        CurveMode::Ensemble => {
            let d = args.dist()?;
            let n = usize::try_from(args.n_total.unwrap_or(20))?;
            let reps = args.reps.unwrap_or(100);
            let ens = empirical_cdf_ensemble(&d, n, reps, args.seed.unwrap_or(0))?;
            let header: Vec<String> = ens.levels.iter().copied().map(fmt_num).collect();
            writeln!(out, "{}", header.join(","))?;
            for row in &ens.samples {
                let cells: Vec<String> = row.iter().copied().map(fmt_num).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
    }
    emit(out.as_bytes(), args.out.as_deref(), stdout)?;
    Ok(Status::Success)
}
