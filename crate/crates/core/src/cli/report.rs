//! Checks, CSV series and the JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::mc::Estimate;

use super::config::ExperimentConfig;

/// One gated comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    /// Stable identifier, also listed by `describe`.
    pub id: String,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of `lhs - rhs` for Monte Carlo checks.
    pub stderr: Option<f64>,
    /// Human-readable gate, e.g. `|lhs - rhs| < 1e-10`.
    pub gate: String,
    pub pass: bool,
}

impl Check {
    fn new(id: &str, name: &str, lhs: f64, rhs: f64, stderr: Option<f64>, gate: String, pass: bool) -> Self {
        Check { id: id.into(), name: name.into(), lhs, rhs, stderr, gate, pass }
    }

    /// `|lhs - rhs| < tol`.
    pub fn abs(id: &str, name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(id, name, lhs, rhs, None, format!("|lhs - rhs| < {tol:e}"), (lhs - rhs).abs() < tol)
    }

    /// `|lhs - rhs| < tol max(|lhs|, |rhs|)`.
    pub fn rel(id: &str, name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let pass = (lhs - rhs).abs() <= tol * scale;
        Self::new(id, name, lhs, rhs, None, format!("|lhs - rhs| <= {tol:e} max(|lhs|, |rhs|)"), pass)
    }

    /// `|lhs - rhs| < tol |rhs|`, for a known target `rhs`.
    pub fn rel_to(id: &str, name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let pass = (lhs - rhs).abs() < tol * rhs.abs();
        Self::new(id, name, lhs, rhs, None, format!("|lhs - rhs| < {tol} |rhs|"), pass)
    }

    /// Monte Carlo estimate against a target, within `k` standard errors.
    pub fn mc(id: &str, name: &str, est: &Estimate, target: f64, k: f64) -> Self {
        let pass = est.consistent_with(target, k) && est.mean.is_finite();
        Self::new(id, name, est.mean, target, Some(est.stderr), format!("|lhs - rhs| <= {k} stderr"), pass)
    }

    /// Paired difference `lhs - rhs` within `k` standard errors of zero.
    pub fn paired(id: &str, name: &str, lhs: f64, rhs: f64, diff: &Estimate, k: f64) -> Self {
        let pass = diff.consistent_with(0.0, k) && diff.mean.is_finite();
        Self::new(id, name, lhs, rhs, Some(diff.stderr), format!("|paired lhs - rhs| <= {k} stderr"), pass)
    }

    /// `lhs < rhs`.
    pub fn below(id: &str, name: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(id, name, lhs, rhs, None, "lhs < rhs".into(), lhs < rhs)
    }
}

/// A table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub header: Vec<String>,
    /// Non-finite entries are written as empty fields.
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Series { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows }
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// CSV text with a header row and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_number(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Everything a suite produces.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    /// Ungated quantities worth recording.
    pub diagnostics: BTreeMap<String, f64>,
}

impl SuiteOutput {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub diagnostics: BTreeMap<String, f64>,
    pub series: Vec<String>,
}

impl Report {
    pub fn new(config: &ExperimentConfig, out: &SuiteOutput) -> Self {
        Report {
            suite: config.suite.clone(),
            seed: config.seed,
            config: config.clone(),
            passed: out.checks.iter().all(|c| c.pass),
            checks: out.checks.clone(),
            diagnostics: out.diagnostics.clone(),
            series: out.series.iter().map(Series::file_name).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Write `report.json` and the CSV series into `dir`; returns the report path.
    pub fn write(&self, dir: &Path, out: &SuiteOutput) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        for s in &out.series {
            fs::write(dir.join(s.file_name()), s.to_csv())?;
        }
        let path = dir.join("report.json");
        let mut f = fs::File::create(&path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_number(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(format_number(f64::NAN), "");
        let v = 0.1 + 0.2;
        assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_layout() {
        let s = Series::new("x", &["a", "b"], vec![vec![1.0, f64::INFINITY], vec![-2.5, 0.0]]);
        assert_eq!(s.to_csv(), "a,b\n1.0000000000000000e0,\n-2.5000000000000000e0,0.0000000000000000e0\n");
    }

    #[test]
    fn gates() {
        assert!(Check::abs("a", "a", 1.0, 1.0 + 1e-12, 1e-10).pass);
        assert!(!Check::abs("a", "a", 1.0, 1.1, 1e-10).pass);
        assert!(Check::rel("r", "r", 100.0, 100.001, 1e-4).pass);
        assert!(Check::rel("r", "r", 0.0, 0.0, 1e-4).pass);
        let e = Estimate { mean: 1.0, stderr: 0.1, n: 100 };
        assert!(Check::mc("m", "m", &e, 1.25, 3.0).pass);
        assert!(!Check::mc("m", "m", &e, 1.35, 3.0).pass);
        let nan = Estimate { mean: f64::NAN, stderr: f64::NAN, n: 100 };
        assert!(!Check::mc("m", "m", &nan, 0.0, 3.0).pass);
    }
}
