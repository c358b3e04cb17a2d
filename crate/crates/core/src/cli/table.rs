//! Tabular results with an embedded metadata block, written as CSV or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{Mode, RunConfig};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct TableError {
    pub line: usize,
    pub message: String,
}

fn table_error(line: usize, message: impl Into<String>) -> TableError {
    TableError { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub mode: Mode,
    /// Fully resolved configuration that produced the table.
    pub config: RunConfig,
    pub conventions: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(mode: Mode, config: RunConfig, conventions: BTreeMap<String, String>) -> Self {
        Self { tool: TOOL_NAME.to_string(), version: TOOL_VERSION.to_string(), mode, config, conventions }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Twelve significant digits in lowercase scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

impl ResultTable {
    pub fn new(metadata: Metadata, columns: Vec<String>) -> Self {
        Self { metadata, columns, rows: Vec::new() }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn is_rectangular(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.columns.len())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let config = serde_json::to_string(&m.config).expect("config serializes");
        let _ = writeln!(out, "# tool: {}", m.tool);
        let _ = writeln!(out, "# version: {}", m.version);
        let _ = writeln!(out, "# mode: {}", m.mode);
        let _ = writeln!(out, "# config: {config}");
        for (k, v) in &m.conventions {
            let _ = writeln!(out, "# convention.{k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut tool = None;
        let mut version = None;
        let mut mode = None;
        let mut config = None;
        let mut conventions = BTreeMap::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();

        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if let Some(meta) = line.strip_prefix('#') {
                if columns.is_some() {
                    return Err(table_error(lineno, "metadata after header row"));
                }
                let (key, value) = meta
                    .trim_start()
                    .split_once(": ")
                    .ok_or_else(|| table_error(lineno, "metadata line is not `key: value`"))?;
                match key {
                    "tool" => tool = Some(value.to_string()),
                    "version" => version = Some(value.to_string()),
                    "mode" => {
                        let m: Mode = serde_json::from_value(serde_json::Value::String(value.to_string()))
                            .map_err(|e| table_error(lineno, e.to_string()))?;
                        mode = Some(m);
                    }
                    "config" => {
                        let c: RunConfig =
                            serde_json::from_str(value).map_err(|e| table_error(lineno, e.to_string()))?;
                        config = Some(c);
                    }
                    _ => match key.strip_prefix("convention.") {
                        Some(name) => {
                            conventions.insert(name.to_string(), value.to_string());
                        }
                        None => return Err(table_error(lineno, format!("unknown metadata key {key:?}"))),
                    },
                }
            } else if columns.is_none() {
                columns = Some(line.split(',').map(str::to_string).collect());
            } else {
                let width = columns.as_ref().map_or(0, Vec::len);
                let row = line
                    .split(',')
                    .map(|s| s.parse::<f64>().map_err(|e| table_error(lineno, format!("{s:?}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if row.len() != width {
                    return Err(table_error(lineno, format!("expected {width} cells, got {}", row.len())));
                }
                rows.push(row);
            }
        }

        let missing = |what: &str| table_error(0, format!("missing {what}"));
        let metadata = Metadata {
            tool: tool.ok_or_else(|| missing("tool"))?,
            version: version.ok_or_else(|| missing("version"))?,
            mode: mode.ok_or_else(|| missing("mode"))?,
            config: config.ok_or_else(|| missing("config"))?,
            conventions,
        };
        Ok(Self { metadata, columns: columns.ok_or_else(|| missing("header row"))?, rows })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let table: Self = serde_json::from_str(text).map_err(|e| table_error(e.line(), e.to_string()))?;
        if !table.is_rectangular() {
            return Err(table_error(0, "rows do not match the column count"));
        }
        Ok(table)
    }
}
