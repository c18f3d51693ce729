//! Report bundles: CSV tables, a JSON summary and optional SVG plots.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::exit::CliError;
use crate::svg::LineChart;

pub fn version_string() -> String {
    format!("hamf v{}", env!("CARGO_PKG_VERSION"))
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal form; `Display` for `f64` never uses a locale.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv encoding: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// One named property with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub passed: bool,
    /// Distance to failure in the property's own units; negative when it failed.
    pub margin: f64,
    pub detail: String,
}

pub struct ReportBundle {
    pub command: String,
    pub results: Value,
    pub tables: Vec<Table>,
    pub plots: Vec<(String, LineChart)>,
    pub properties: Vec<PropertyOutcome>,
}

impl ReportBundle {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), results: json!({}), tables: Vec::new(), plots: Vec::new(), properties: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.properties.iter().filter(|p| !p.passed).map(|p| p.name.as_str()).collect()
    }

    pub fn summary(&self, config: &RunConfig) -> Value {
        json!({
            "tool": "hamf",
            "version": version_string(),
            "command": self.command,
            "status": if self.passed() { "pass" } else { "fail" },
            "config": config,
            "results": self.results,
            "properties": self.properties,
            "tables": self.tables.iter().map(|t| format!("{}_{}.csv", self.command, t.name)).collect::<Vec<_>>(),
        })
    }

    /// Writes every artifact into `dir`, creating it when missing. Returns the written paths.
    pub fn write(&self, dir: &Path, config: &RunConfig, with_svg: bool) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<(), CliError> {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
            written.push(p);
            Ok(())
        };
        for t in &self.tables {
            put(format!("{}_{}.csv", self.command, t.name), t.to_csv()?)?;
        }
        let mut summary = serde_json::to_string_pretty(&self.summary(config)).map_err(|e| CliError::Config(e.to_string()))?;
        summary.push('\n');
        put(format!("{}_summary.json", self.command), summary)?;
        if with_svg {
            for (name, chart) in &self.plots {
                put(format!("{}_{}.svg", self.command, name), chart.render())?;
            }
        }
        Ok(written)
    }
}
