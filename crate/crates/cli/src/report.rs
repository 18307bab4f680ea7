//! JSON run reports and CSV tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    /// Shortest round-trip decimal; independent of locale.
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// What an experiment produces before it is written out.
#[derive(Debug, Default)]
pub struct Outcome {
    pub scalars: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn scalar(&mut self, key: &str, value: impl Serialize) {
        self.scalars.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable scalar"),
        );
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub experiment: &'a str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: &'a Config,
    pub seed: Option<u64>,
    pub scalars: &'a BTreeMap<String, Value>,
    pub tables: Vec<String>,
    pub checks: &'a [Check],
    pub warnings: &'a [String],
    pub passed: bool,
    pub wall_time_s: f64,
}

/// SHA-256 of the resolved config serialized as JSON.
pub fn config_hash(config: &Config) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Writes `<experiment>.json` and one CSV per table into `dir`; returns the JSON path.
pub fn write(
    dir: &Path,
    experiment: &str,
    config: &Config,
    seed: Option<u64>,
    outcome: &Outcome,
    wall_time_s: f64,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut names = Vec::new();
    for t in &outcome.tables {
        let file = format!("{}.csv", t.name);
        t.write(&dir.join(&file))?;
        names.push(file);
    }
    let report = RunReport {
        experiment,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(config),
        config,
        seed,
        scalars: &outcome.scalars,
        tables: names,
        checks: &outcome.checks,
        warnings: &outcome.warnings,
        passed: outcome.passed(),
        wall_time_s,
    };
    let path = dir.join(format!("{experiment}.json"));
    let text = serde_json::to_string_pretty(&report)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_render_without_locale() {
        assert_eq!(Cell::Num(0.5).render(), "0.5");
        assert_eq!(Cell::Num(1e-20).render(), "1e-20");
        assert_eq!(Cell::Num(-3.0).render(), "-3.0");
        assert_eq!(Cell::Int(7).render(), "7");
    }

    #[test]
    fn tables_are_plain_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t", &["x", "label"]);
        t.push(vec![1.25.into(), "a,b".into()]);
        t.write(&dir.path().join("t.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "x,label\n1.25,\"a,b\"\n");
    }
}
