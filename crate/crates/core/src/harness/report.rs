//! Experiment reports: per-`n` rows, tables, checks and a fingerprint.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::{ExperimentConfig, ExperimentKind, Tolerances};
use crate::stats::Estimate;

/// A Monte Carlo estimate with its standard error and replica count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub mean: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub stderr: f64,
    pub replicas: usize,
}

impl Metric {
    pub fn new(name: &str, est: Estimate) -> Self {
        Metric {
            name: name.to_string(),
            mean: est.mean,
            stderr: est.stderr,
            replicas: est.count,
        }
    }

    pub fn from_samples(name: &str, xs: &[f64]) -> Self {
        Self::new(name, Estimate::from_samples(xs))
    }
}

/// A deterministic value (hydrodynamic or rate-function side, or a derived gap).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub name: String,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub metrics: Vec<Metric>,
    pub reference: Vec<Value>,
}

impl Row {
    pub fn new(n: usize) -> Self {
        Row {
            n,
            metrics: Vec::new(),
            reference: Vec::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.reference.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub(crate) fn push_metric(&mut self, m: Metric) {
        self.metrics.push(m);
    }

    pub(crate) fn push_value(&mut self, name: &str, value: f64) {
        self.reference.push(Value {
            name: name.to_string(),
            value,
        });
    }
}

/// Free-form numeric table, written as its own CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub version: String,
    pub config_hash: String,
}

impl Fingerprint {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Fingerprint {
            seed: cfg.run.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub tolerances: Tolerances,
    pub fingerprint: Fingerprint,
}

impl ExperimentReport {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            kind: cfg.kind,
            rows: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            tolerances: cfg.tolerances.clone(),
            fingerprint: Fingerprint::of(cfg),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn row(&self, n: usize) -> Option<&Row> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub(crate) fn push_check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    /// Means of metric `name` along the rows.
    pub fn series(&self, name: &str) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.metric(name).map_or(f64::NAN, |m| m.mean))
            .collect()
    }

    /// Reference values `name` along the rows.
    pub fn value_series(&self, name: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.value(name).unwrap_or(f64::NAN)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Long-format summary: `n,quantity,mean,stderr,replicas`.
    pub fn write_summary_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "n,quantity,mean,stderr,replicas")?;
        for row in &self.rows {
            for m in &row.metrics {
                writeln!(w, "{},{},{},{},{}", row.n, m.name, m.mean, m.stderr, m.replicas)?;
            }
            for v in &row.reference {
                writeln!(w, "{},{},{},,", row.n, v.name, v.value)?;
            }
        }
        Ok(())
    }

    pub fn write_table_csv<W: Write>(table: &Table, w: &mut W) -> Result<()> {
        writeln!(w, "{}", table.columns.join(","))?;
        for r in &table.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Writes `report.json`, `summary.csv` and one CSV per table into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()?)?;
        written.push(path);
        let path = dir.join("summary.csv");
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        self.write_summary_csv(&mut f)?;
        f.flush()?;
        written.push(path);
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            Self::write_table_csv(t, &mut f)?;
            f.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Strictly decreasing sequence.
pub(crate) fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

pub(crate) fn fmt_series(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}
