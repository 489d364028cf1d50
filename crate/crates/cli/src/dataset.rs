//! Quantile dataset files.
//!
//! A dataset is a CSV file with header `q,x` and one row per quantile.
//! Lines starting with `#` are comments; a comment of the form
//! `# meta: N=12918, scale_divisor=7500` supplies the sample size and the
//! optional divisor the values are normalized by before fitting.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qmatch::orderstats::QuantileObservation;

/// Values given on the command line; they take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub n_total: Option<u64>,
    pub scale_divisor: Option<f64>,
}

#[derive(Debug, Default)]
struct Meta {
    n_total: Option<u64>,
    scale_divisor: Option<f64>,
}

fn parse_meta(text: &str) -> Result<Meta> {
    let mut meta = Meta::default();
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        let Some(fields) = rest.trim_start().strip_prefix("meta:") else {
            continue;
        };
        let line_no = i + 1;
        for field in fields.split([',', ' ', '\t']).filter(|f| !f.is_empty()) {
            let (key, value) = field.split_once('=').ok_or_else(|| {
                anyhow!("line {line_no}: expected key=value in meta, got `{field}`")
            })?;
            match key {
                "N" | "n" => {
                    let n: u64 = value.parse().with_context(|| {
                        format!("line {line_no}: N must be a positive integer, got `{value}`")
                    })?;
                    meta.n_total = Some(n);
                }
                "scale_divisor" => {
                    let d: f64 = value.parse().with_context(|| {
                        format!("line {line_no}: scale_divisor must be a number, got `{value}`")
                    })?;
                    meta.scale_divisor = Some(d);
                }
                other => bail!(
                    "line {line_no}: unknown meta key `{other}` (expected N or scale_divisor)"
                ),
            }
        }
    }
    Ok(meta)
}

fn parse_number(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| anyhow!("line {line}: {name} is not a number: `{field}`"))?;
    if !v.is_finite() {
        bail!("line {line}: {name} must be finite, got `{field}`");
    }
    Ok(v)
}

/// Parses dataset text into an observation.
pub fn parse_dataset(text: &str, overrides: Overrides) -> Result<QuantileObservation> {
    let meta = parse_meta(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .context("cannot read the header row")?
        .clone();
    if headers.len() != 2 || &headers[0] != "q" || &headers[1] != "x" {
        let line = text
            .lines()
            .position(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map_or(1, |i| i + 1);
        bail!(
            "line {line}: header must be `q,x`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        );
    }

    let mut q = Vec::new();
    let mut x = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => anyhow!("line {}: {e}", p.line()),
            None => anyhow!("{e}"),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            bail!("line {line}: expected 2 fields, found {}", record.len());
        }
        let qi = parse_number(&record[0], "q", line)?;
        let xi = parse_number(&record[1], "x", line)?;
        if !(qi > 0.0 && qi < 1.0) {
            bail!("line {line}: q = {qi} is not in (0, 1)");
        }
        if let (Some(&qp), Some(&xp)) = (q.last(), x.last()) {
            if qi <= qp {
                bail!("line {line}: q = {qi} does not increase over the previous row ({qp})");
            }
            if xi <= xp {
                bail!("line {line}: x = {xi} does not increase over the previous row ({xp})");
            }
        }
        q.push(qi);
        x.push(xi);
    }
    if q.is_empty() {
        bail!("dataset has no rows");
    }

    let n_total = overrides
        .n_total
        .or(meta.n_total)
        .ok_or_else(|| anyhow!("sample size unknown: add `# meta: N=...` or pass --n"))?;
    let obs = QuantileObservation::new(q, x, n_total)?;
    match overrides.scale_divisor.or(meta.scale_divisor) {
        Some(d) => Ok(obs.with_scale_divisor(d)?),
        None => Ok(obs),
    }
}

pub fn read_dataset(path: &Path, overrides: Overrides) -> Result<QuantileObservation> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read dataset {}", path.display()))?;
    parse_dataset(&text, overrides).with_context(|| format!("invalid dataset {}", path.display()))
}

/// Formats a number in shortest round-trip form, switching to scientific
/// notation for very large or very small magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Serializes an observation in the dataset format, including the meta
/// line. Values are written in shortest round-trip form.
pub fn format_dataset(obs: &QuantileObservation) -> String {
    let mut out = format!("# meta: N={}", obs.n_total());
    if obs.scale_divisor() != 1.0 {
        let _ = write!(out, ", scale_divisor={}", fmt_num(obs.scale_divisor()));
    }
    out.push_str("\nq,x\n");
    for (q, x) in obs.q().iter().zip(obs.x()) {
        let _ = writeln!(out, "{},{}", fmt_num(*q), fmt_num(*x));
    }
    out
}
