//! Structured experiment output: measured values, tables, pass/fail checks.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::fit::Fit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The quantity could not be asserted (e.g. a fit residual too large, or
    /// a rate requested of an identically zero term). Not a pass.
    Unasserted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unasserted => "UNASSERTED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub measured: Option<f64>,
    pub window: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Check {
    pub fn new(id: &str, description: &str, measured: Option<f64>, window: &str, ok: bool) -> Self {
        Check {
            id: id.to_string(),
            description: description.to_string(),
            measured,
            window: window.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    /// `lo ≤ measured ≤ hi`.
    pub fn within(id: &str, description: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(
            id,
            description,
            Some(measured),
            &format!("[{lo}, {hi}]"),
            measured >= lo && measured <= hi,
        )
    }

    /// `measured ≤ hi`.
    pub fn at_most(id: &str, description: &str, measured: f64, hi: f64) -> Self {
        Self::new(id, description, Some(measured), &format!("<= {hi:e}"), measured <= hi)
    }

    /// A fitted slope inside `[lo, hi]`, only asserted when the fit is clean.
    pub fn slope(id: &str, description: &str, fit: &Fit, lo: f64, hi: f64) -> Self {
        let mut c = Self::within(id, description, fit.slope, lo, hi);
        if !fit.assertable() {
            c.status = Status::Unasserted;
            c.note = Some(format!(
                "fit residual {:.3} exceeds the assertion threshold",
                fit.residual
            ));
        }
        c
    }

    pub fn unasserted(id: &str, description: &str, window: &str, note: &str) -> Self {
        Check {
            id: id.to_string(),
            description: description.to_string(),
            measured: None,
            window: window.to_string(),
            status: Status::Unasserted,
            note: Some(note.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Rectangular numeric table; `None` marks an unresolved entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(name: &str, description: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            description: description.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "table row width mismatch");
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| Some(*v)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// CSV with a `#` comment line describing the columns, then a header row.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# {}", self.description)?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Where and how a report was produced. Excluded from numeric comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub package_version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub fft_backend: String,
}

impl Fingerprint {
    pub fn current() -> Self {
        Fingerprint {
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
            fft_backend: "rustfft 6".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: Value,
    pub measurements: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub fingerprint: Fingerprint,
}

impl ExperimentReport {
    pub fn new(experiment: &str, parameters: impl Serialize) -> Result<Self> {
        Ok(ExperimentReport {
            experiment: experiment.to_string(),
            parameters: serde_json::to_value(parameters)?,
            measurements: BTreeMap::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            fingerprint: Fingerprint::current(),
        })
    }

    /// Records a measured value; non-finite scalars are refused.
    pub fn measure(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value)?;
        self.measurements.insert(key.to_string(), v);
        Ok(())
    }

    pub fn measure_f64(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::numeric(format!("measured value {key} is not finite: {value}")));
        }
        self.measure(key, value)
    }

    pub fn measure_fit(&mut self, key: &str, fit: &Fit) -> Result<()> {
        if !(fit.slope.is_finite() && fit.residual.is_finite()) {
            return Err(Error::numeric(format!("fit {key} is not finite")));
        }
        self.measure(key, fit)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.measurements.get(key).and_then(Value::as_f64)
    }

    pub fn add_table(&mut self, table: Table) -> Result<()> {
        if table.rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("table {} has non-finite entries", table.name)));
        }
        self.tables.push(table);
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn find_check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Everything except the fingerprint, as canonical JSON text. Two runs
    /// with identical configuration must agree on this byte for byte.
    pub fn numerics(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut v {
            map.remove("fingerprint");
        }
        Ok(serde_json::to_string(&v)?)
    }

    /// Writes `report.json` and one CSV per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("report.json"), json)?;
        for table in &self.tables {
            let file = std::fs::File::create(dir.join(format!("{}.csv", table.name)))?;
            table.write_csv(std::io::BufWriter::new(file))?;
        }
        Ok(())
    }

    /// Human-oriented one-line-per-check summary.
    pub fn summary(&self) -> String {
        let mut out = format!("experiment {}\n", self.experiment);
        for c in &self.checks {
            let measured = c.measured.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "  [{}] {}: {} (measured {}, window {})",
                c.status, c.id, c.description, measured, c.window
            ));
            if let Some(note) = &c.note {
                out.push_str(&format!(" -- {note}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerics_exclude_fingerprint() {
        let mut a = ExperimentReport::new("x", serde_json::json!({"n": 1})).unwrap();
        a.measure_f64("v", 1.5).unwrap();
        let mut b = a.clone();
        b.fingerprint.threads += 7;
        assert_eq!(a.numerics().unwrap(), b.numerics().unwrap());
        assert!(a.measure_f64("bad", f64::NAN).is_err());
    }

    #[test]
    fn unasserted_slope_is_not_a_pass() {
        let fit = Fit {
            slope: 1.0,
            intercept: 0.0,
            residual: 0.5,
            points: 4,
        };
        let c = Check::slope("s", "slope", &fit, 0.9, 1.1);
        assert_eq!(c.status, Status::Unasserted);
        assert!(!c.passed());
    }

    #[test]
    fn table_csv_has_comment_and_header() {
        let mut t = Table::new("t", "n and value", &["n", "value"]);
        t.push(vec![Some(5.0), None]);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "# n and value\nn,value\n5e0,\n");
    }
}
