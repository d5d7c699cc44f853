//! Run reports and their canonical serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationReport;
use crate::config::RunConfig;
use crate::curvature::CrossValidation;
use crate::error::{Error, Result};
use crate::jets::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub tolerance: f64,
    /// Worst value over all points that evaluated without error.
    pub worst: f64,
    /// Index into the sampled points where `worst` was attained.
    pub worst_point: Option<usize>,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            worst: 0.0,
            worst_point: None,
            passed: true,
        }
    }

    /// Fold in one observation. Non-finite values fail the check and are
    /// recorded as `f64::MAX` so the report stays valid JSON.
    pub fn observe(&mut self, value: f64, point: usize) {
        let value = if value.is_finite() { value } else { f64::MAX };
        if self.worst_point.is_none() || value > self.worst {
            self.worst = value;
            self.worst_point = Some(point);
        }
        if value > self.tolerance {
            self.passed = false;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub passed: bool,
    pub checks: BTreeMap<String, CheckResult>,
    /// Per-point or suite-level errors; any entry fails the suite.
    pub errors: Vec<String>,
    /// Free-form observations such as the measured signature.
    pub notes: BTreeMap<String, String>,
}

impl SuiteResult {
    pub fn finish(&mut self) {
        self.passed = self.errors.is_empty() && self.checks.values().all(|c| c.passed);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub index: usize,
    pub point: Point,
    /// Worst residual per check at this point.
    pub residuals: BTreeMap<String, f64>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub calibration: CalibrationReport,
    pub suites: BTreeMap<String, SuiteResult>,
    pub curvature: Option<CrossValidation>,
    pub points: Vec<PointSummary>,
    pub passed: bool,
    /// Only present when timing was requested; it breaks byte determinism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Writes every float in scientific notation with 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

/// Canonical JSON: keys sorted, floats at fixed precision, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let tree = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    tree.serialize(&mut ser).map_err(|e| Error::Config(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn to_text(r: &RunReport) -> String {
    let mut s = String::new();
    let name = r.config.name.as_deref().unwrap_or("unnamed");
    let _ = writeln!(s, "hspace {} :: {} {}", r.version, name, r.config.spec.kind);
    let _ = writeln!(s, "points: {}", r.points.len());
    for (suite, res) in &r.suites {
        let _ = writeln!(s, "{} {suite}", status(res.passed));
        for (check, c) in &res.checks {
            let _ = writeln!(
                s,
                "    {check}: worst {:.3e} (tol {:.1e}) {}",
                c.worst,
                c.tolerance,
                status(c.passed)
            );
        }
        for (k, v) in &res.notes {
            let _ = writeln!(s, "    {k}: {v}");
        }
        for e in res.errors.iter().take(5) {
            let _ = writeln!(s, "    error: {e}");
        }
        if res.errors.len() > 5 {
            let _ = writeln!(s, "    ... {} more errors", res.errors.len() - 5);
        }
    }
    let cal = &r.calibration;
    for out in [Some(&cal.riemann_sign), Some(&cal.orientation), cal.reading.as_ref()]
        .into_iter()
        .flatten()
    {
        let chosen = out.selected().map_or("none", |c| c.name.as_str());
        let _ = writeln!(
            s,
            "calibration {}: {chosen}{}",
            out.question,
            if out.decisive { "" } else { " (not decisive)" }
        );
    }
    if let Some(t) = r.wall_clock_seconds {
        let _ = writeln!(s, "wall clock: {t:.3} s");
    }
    let _ = writeln!(s, "overall: {}", status(r.passed));
    s
}

pub fn emit_report(r: &RunReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => to_canonical_json(r),
        Format::Text => Ok(to_text(r).into_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let v = serde_json::json!({"b": 0.1, "a": [1.0, 1e-300]});
        let s = String::from_utf8(to_canonical_json(&v).unwrap()).unwrap();
        assert_eq!(
            s,
            "{\"a\":[1.0000000000000000e0,1.0000000000000000e-300],\"b\":1.0000000000000001e-1}\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        let xs = [0.1, 1.0 / 3.0, 2.0_f64.sqrt() * 1e-17, f64::MAX, 5e-324];
        let s = to_canonical_json(&xs).unwrap();
        let back: Vec<f64> = serde_json::from_slice(&s).unwrap();
        assert_eq!(back, xs);
    }

    #[test]
    fn check_tracks_worst_and_failure() {
        let mut c = CheckResult::new(1e-8);
        c.observe(1e-10, 0);
        c.observe(5e-9, 3);
        c.observe(1e-12, 4);
        assert_eq!((c.worst, c.worst_point, c.passed), (5e-9, Some(3), true));
        c.observe(2e-8, 7);
        assert!(!c.passed);
        c.observe(f64::NAN, 9);
        assert_eq!((c.worst, c.worst_point), (f64::MAX, Some(9)));
    }
}
