//! Report rows and their JSON / CSV serialization.

use std::io::Write;
use std::path::Path;

use fracwave_core::trend::Trend;
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Reported for reference only; never affects the exit status.
    Info,
}

/// One refinement level (or one sweep point) of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub modes: Option<usize>,
    pub lambda: Option<f64>,
    pub value: f64,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

impl Level {
    pub fn new(n: usize, value: f64) -> Self {
        Self { n, modes: None, lambda: None, value, lhs: None, rhs: None }
    }

    pub fn with_modes(mut self, k: usize) -> Self {
        self.modes = Some(k);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_sides(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Label of the identity or estimate under test.
    pub anchor: String,
    pub check: String,
    pub suite: String,
    pub case: String,
    pub metric: String,
    pub tolerance: f64,
    pub levels: Vec<Level>,
    pub trend: Option<Trend>,
    pub observed: Option<f64>,
    pub predicted: Option<f64>,
    pub status: Status,
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(anchor: &str, check: &str, suite: &str, case: &str, metric: &str) -> Self {
        Self {
            anchor: anchor.into(),
            check: check.into(),
            suite: suite.into(),
            case: case.into(),
            metric: metric.into(),
            tolerance: 0.0,
            levels: Vec::new(),
            trend: None,
            observed: None,
            predicted: None,
            status: Status::Skipped,
            note: None,
        }
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn levels(mut self, levels: Vec<Level>) -> Self {
        self.levels = levels;
        self
    }

    pub fn status(mut self, pass: bool) -> Self {
        self.status = if pass { Status::Pass } else { Status::Fail };
        self
    }

    pub fn info(mut self) -> Self {
        self.status = Status::Info;
        self
    }

    pub fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.note = Some(reason.into());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn last_value(&self) -> Option<f64> {
        self.levels.last().map(|l| l.value)
    }

    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value).collect()
    }

    fn floats(&self) -> impl Iterator<Item = f64> + '_ {
        let per_level = self.levels.iter().flat_map(|l| [Some(l.value), l.lambda, l.lhs, l.rhs].into_iter().flatten());
        [Some(self.tolerance), self.observed, self.predicted].into_iter().flatten().chain(per_level)
    }
}

/// Sorts rows by (anchor, check, case) so output order never depends on scheduling.
pub fn sort_reports(reports: &mut [CheckReport]) {
    reports.sort_by(|a, b| (&a.anchor, &a.check, &a.case).cmp(&(&b.anchor, &b.check, &b.case)));
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.status != Status::Fail)
}

fn check_finite(reports: &[CheckReport]) -> Result<()> {
    for r in reports {
        if r.floats().any(|v| !v.is_finite()) {
            return Err(HarnessError::Serialize(format!("non-finite value in check '{}' ({})", r.check, r.case)));
        }
    }
    Ok(())
}

/// Pretty JSON formatter writing every float with 17 significant digits.
struct ExactFloats(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(reports: &[CheckReport]) -> Result<String> {
    check_finite(reports)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(serde_json::ser::PrettyFormatter::new()));
    reports.serialize(&mut ser).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| HarnessError::Serialize(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Vec<CheckReport>> {
    serde_json::from_str(text).map_err(|e| HarnessError::Serialize(e.to_string()))
}

const CSV_HEADER: [&str; 17] = [
    "anchor",
    "check",
    "suite",
    "case",
    "metric",
    "status",
    "tolerance",
    "trend",
    "observed",
    "predicted",
    "level",
    "n",
    "modes",
    "lambda",
    "value",
    "lhs",
    "rhs",
];

fn exact(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(exact).unwrap_or_default()
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_owned)).unwrap_or_default()
}

/// One row per (check, level); checks without levels produce no rows.
pub fn to_csv(reports: &[CheckReport]) -> Result<String> {
    check_finite(reports)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| HarnessError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in reports {
        for (i, l) in r.levels.iter().enumerate() {
            w.write_record([
                r.anchor.clone(),
                r.check.clone(),
                r.suite.clone(),
                r.case.clone(),
                r.metric.clone(),
                label(&r.status),
                exact(r.tolerance),
                r.trend.as_ref().map(label).unwrap_or_default(),
                opt(r.observed),
                opt(r.predicted),
                i.to_string(),
                l.n.to_string(),
                l.modes.map(|k| k.to_string()).unwrap_or_default(),
                opt(l.lambda),
                exact(l.value),
                opt(l.lhs),
                opt(l.rhs),
            ])
            .map_err(ser)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Serialize(e.to_string()))
}

pub fn render(reports: &[CheckReport], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(reports),
        OutputFormat::Csv => to_csv(reports),
    }
}

pub fn emit(reports: &[CheckReport], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(reports, format)?;
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.into(), source })
}
