//! JSON report files.
//!
//! Reports are pretty-printed with keys in declaration order and every
//! float written in scientific notation with 17 significant digits, which
//! is enough to read back the identical `f64`.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use qmatch::inference::LikelihoodKind;
use qmatch::predictive::{FitReport, RankEntry};
use qmatch::Family;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

/// A single fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub dataset: String,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    pub family: Family,
    pub error: String,
}

/// Several families fitted to one dataset, ranked by mean log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareFile {
    pub dataset: String,
    pub likelihood: LikelihoodKind,
    pub ranking: Vec<RankEntry>,
    pub failures: Vec<FitFailure>,
    pub reports: Vec<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format")]
#[allow(clippy::large_enum_variant)]
pub enum ReportFile {
    #[serde(rename = "qmatch-fit/1")]
    Fit(FitFile),
    #[serde(rename = "qmatch-compare/1")]
    Compare(CompareFile),
}

impl ReportFile {
    /// The fit a prediction should use: the report itself, or the best
    /// ranked model of a comparison.
    pub fn primary_fit(&self) -> Option<&FitReport> {
        match self {
            ReportFile::Fit(f) => Some(&f.report),
            ReportFile::Compare(c) => {
                let best = c.ranking.iter().find(|r| r.best)?;
                c.reports.iter().find(|r| r.family == best.family)
            }
        }
    }
}

/// Pretty printer that writes floats as `{:.16e}`.
struct ExactFloats(PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .context("cannot serialize report")?;
    out.push(b'\n');
    Ok(out)
}

pub fn read_report(path: &Path) -> Result<ReportFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read report {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid report {}", path.display()))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
