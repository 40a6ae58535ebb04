//! Report assembly and the files written next to it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use polyball::CMat;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub status: Status,
    pub reason: String,
}

#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
    pub spectra: Vec<f64>,
    pub matrices: Vec<(String, CMat)>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            command: command.to_string(),
            config,
            checks: Vec::new(),
            results: Map::new(),
            spectra: Vec::new(),
            matrices: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, value: Option<f64>, status: Status, reason: impl Into<String>) {
        let value = value.filter(|v| v.is_finite());
        self.checks.push(Check { name: name.into(), value, status, reason: reason.into() });
    }

    /// PASS when `value ≤ bound`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let ok = value <= bound;
        let reason = format!("{value:.3e} {} {bound:.1e}", if ok { "≤" } else { ">" });
        self.push(name, Some(value), if ok { Status::Pass } else { Status::Fail }, reason);
    }

    pub fn holds(&mut self, name: impl Into<String>, value: Option<f64>, ok: bool, reason: impl Into<String>) {
        self.push(name, value, if ok { Status::Pass } else { Status::Fail }, reason);
    }

    pub fn fail(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.push(name, None, Status::Fail, reason);
    }

    pub fn skip(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.push(name, None, Status::Skipped, reason);
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), serde_json::to_value(value).expect("serializable result"));
    }

    pub fn matrix(&mut self, name: impl Into<String>, m: &CMat) {
        self.matrices.push((name.into(), m.clone()));
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self, wall_time: f64) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "checks": self.checks,
            "results": self.results,
            "wall_time": wall_time,
            "versions": BTreeMap::from([
                ("polyball", polyball::VERSION),
                ("polyball-lab", env!("CARGO_PKG_VERSION")),
            ]),
        })
    }

    pub fn summary(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(4).max(5);
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = writeln!(out, "{status:<5} {:<width$}  {}", c.name, c.reason);
        }
        let count = |s| self.checks.iter().filter(|c| c.status == s).count();
        let _ = writeln!(
            out,
            "{}: {} passed, {} failed, {} skipped",
            self.command,
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skipped)
        );
        out
    }

    pub fn write(&self, dir: &Path, wall_time: f64) -> CliResult<()> {
        let io = |e: std::io::Error| CliError::Io(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let text = serde_json::to_string_pretty(&self.to_json(wall_time)).expect("report serializes");
        std::fs::write(dir.join("report.json"), text + "\n").map_err(io)?;
        if !self.spectra.is_empty() {
            let mut csv = String::from("index,eigenvalue\n");
            for (i, x) in self.spectra.iter().enumerate() {
                let _ = writeln!(csv, "{i},{x:.17e}");
            }
            std::fs::write(dir.join("spectra.csv"), csv).map_err(io)?;
        }
        if !self.matrices.is_empty() {
            let mdir = dir.join("matrices");
            std::fs::create_dir_all(&mdir).map_err(io)?;
            for (name, m) in &self.matrices {
                let text = serde_json::to_string(&matrix_json(m)).expect("matrix serializes");
                std::fs::write(mdir.join(format!("{name}.json")), text + "\n").map_err(io)?;
            }
        }
        Ok(())
    }
}

/// `{"dim":N,"entries":[[re,im],...]}` row-major; rectangular matrices
/// carry `rows` and `cols` instead of `dim`.
pub fn matrix_json(m: &CMat) -> Value {
    let mut entries = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            entries.push([m[(r, c)].re, m[(r, c)].im]);
        }
    }
    if m.nrows() == m.ncols() {
        json!({ "dim": m.nrows(), "entries": entries })
    } else {
        json!({ "rows": m.nrows(), "cols": m.ncols(), "entries": entries })
    }
}

/// `{1,2}`-style label for a block subset.
pub fn subset_label(a: &[usize]) -> String {
    let parts: Vec<String> = a.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}
