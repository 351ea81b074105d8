//! Self-describing CSV and JSON documents. Both encodings print every
//! number with the same 15 significant digits.

use std::fmt::Write as _;

use crate::config::{Format, RunConfig};

pub const TOOL: &str = "scissors-sim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    pub fn num(value: f64) -> Self {
        Self::Num(value)
    }
}

/// Scientific notation with 15 significant digits; non-finite as `NaN`.
pub fn format_number(value: f64) -> Option<String> {
    value.is_finite().then(|| format!("{value:.14e}"))
}

#[derive(Debug, Clone)]
pub struct Document {
    pub config: Vec<(&'static str, String)>,
    /// Derived facts about the run that are not inputs, e.g. the cutoff
    /// actually used.
    pub info: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Document {
    pub fn new(config: &RunConfig, columns: Vec<String>) -> Self {
        Self {
            config: config.entries(),
            info: Vec::new(),
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = format!("# {TOOL} {VERSION}\n");
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for (k, v) in &self.info {
            let _ = writeln!(out, "#! {k} = {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "#= {k} = {}", csv_cell(v));
        }
        out
    }

    fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"tool\": {},", json_string(TOOL));
        let _ = writeln!(out, "  \"version\": {},", json_string(VERSION));
        let object = |pairs: &mut dyn Iterator<Item = (String, String)>| {
            let body: Vec<String> = pairs.map(|(k, v)| format!("{}: {v}", json_string(&k))).collect();
            format!("{{{}}}", body.join(", "))
        };
        let _ = writeln!(
            out,
            "  \"config\": {},",
            object(&mut self.config.iter().map(|(k, v)| (k.to_string(), json_string(v))))
        );
        let _ = writeln!(
            out,
            "  \"info\": {},",
            object(&mut self.info.iter().map(|(k, v)| (k.clone(), json_string(v))))
        );
        let columns: Vec<String> = self.columns.iter().map(|c| json_string(c)).collect();
        let _ = writeln!(out, "  \"columns\": [{}],", columns.join(", "));
        out.push_str("  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            out.push_str(&object(
                &mut self.columns.iter().cloned().zip(row.iter().map(json_cell)),
            ));
        }
        out.push_str(if self.rows.is_empty() { "],\n" } else { "\n  ],\n" });
        let _ = writeln!(
            out,
            "  \"summary\": {}",
            object(&mut self.summary.iter().map(|(k, v)| (k.clone(), json_cell(v))))
        );
        out.push_str("}\n");
        out
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => format_number(*v).unwrap_or_else(|| "NaN".into()),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_cell(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => format_number(*v).unwrap_or_else(|| "null".into()),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => json_string(s),
    }
}
