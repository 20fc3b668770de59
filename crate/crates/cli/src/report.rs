use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub protocol: String,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub tolerance: f64,
}

/// One tabular report. JSON and CSV are rendered from the same cells, so
/// they carry the same numbers.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub meta: Meta,
    pub pass: Option<bool>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Lines printed under the table.
    pub notes: Vec<String>,
    pub detail: Value,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert((*c).to_string(), v.clone());
                }
                Value::Object(m)
            })
            .collect();
        serde_json::json!({
            "command": self.command,
            "meta": self.meta,
            "pass": self.pass,
            "rows": rows,
            "notes": self.notes,
            "detail": self.detail,
        })
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(csv_cell))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(table_cell).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for r in &cells {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = format!(
            "{} {} | protocol {} | dims {:?} | seed {} | tol {:e}\n",
            self.meta.tool, self.meta.version, self.meta.protocol, self.meta.dims, self.meta.seed, self.meta.tolerance
        );
        let line = |vals: Vec<String>| -> String {
            vals.iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        out.push_str(&line(self.columns.iter().map(|c| c.to_string()).collect()));
        out.push('\n');
        for r in cells {
            out.push_str(&line(r));
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        if let Some(p) = self.pass {
            out.push_str(if p { "PASS\n" } else { "FAIL\n" });
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String, csv::Error> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("report serializes") + "\n",
            Format::Csv => self.to_csv()?,
            Format::Table => self.to_table(),
        })
    }

    pub fn emit(&self, format: Format, out: Option<&std::path::Path>) -> std::io::Result<()> {
        let text = self.render(format).map_err(std::io::Error::other)?;
        match out {
            Some(p) => std::fs::write(p, text),
            None => std::io::stdout().write_all(text.as_bytes()),
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn table_cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.4}", n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
