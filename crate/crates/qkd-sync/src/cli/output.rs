//! Report rendering: one `Fields` value drives all three output formats,
//! so a number is rounded once and appears identically in the table and
//! in the JSON `formatted` block.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::cli::SCHEMA_VERSION;
use crate::error::{Error, Result};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

struct Cell {
    key: String,
    raw: Value,
    formatted: String,
}

/// Ordered rows of (key, raw value, display string).
pub struct Fields {
    command: &'static str,
    rows: Vec<Vec<Cell>>,
}

impl Fields {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            rows: vec![Vec::new()],
        }
    }

    /// Opens a new output row (the first row is implicit).
    pub fn start_row(&mut self) {
        if !self.rows.last().map_or(true, Vec::is_empty) {
            self.rows.push(Vec::new());
        }
    }

    fn push(&mut self, key: &str, raw: Value, formatted: String) {
        self.rows.last_mut().unwrap().push(Cell {
            key: key.to_string(),
            raw,
            formatted,
        });
    }

    pub fn push_f64(&mut self, key: &str, raw: f64, formatted: String) {
        self.push(key, json!(raw), formatted);
    }

    pub fn push_u64(&mut self, key: &str, raw: u64) {
        self.push(key, json!(raw), raw.to_string());
    }

    pub fn push_bool(&mut self, key: &str, raw: bool) {
        self.push(key, json!(raw), raw.to_string());
    }

    pub fn push_str(&mut self, key: &str, raw: &str) {
        self.push(key, json!(raw), raw.to_string());
    }

    fn render_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .flatten()
            .map(|c| c.key.len())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for cell in row {
                out.push_str(&format!("{:width$}  {}\n", cell.key, cell.formatted));
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.rows.first() {
            let header: Vec<&str> = first.iter().map(|c| c.key.as_str()).collect();
            out.push_str(&header.join(","));
            out.push('\n');
        }
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_escape(&c.formatted)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for cell in row {
                    m.insert(cell.key.clone(), cell.raw.clone());
                }
                Value::Object(m)
            })
            .collect();
        let formatted: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for cell in row {
                    m.insert(cell.key.clone(), json!(cell.formatted));
                }
                Value::Object(m)
            })
            .collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "rows": rows,
            "formatted": formatted,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(output: &Option<PathBuf>, format: Format, fields: &Fields) -> Result<()> {
    let text = match format {
        Format::Table => fields.render_table(),
        Format::Csv => fields.render_csv(),
        Format::Json => fields.render_json(),
    };
    match output {
        Some(path) if path != Path::new("-") => fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("cannot write stdout: {e}")))
        }
    }
}
