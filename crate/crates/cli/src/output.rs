//! Machine-readable output: `{schema, config, results[], summary}` as JSON, or the
//! flattened `results[]` as CSV.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "dunkl-cli/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub type Row = Map<String, Value>;

#[derive(Debug, Serialize)]
pub struct Document<C: Serialize> {
    pub schema: &'static str,
    pub config: C,
    pub results: Vec<Row>,
    pub summary: Value,
}

impl<C: Serialize> Document<C> {
    pub fn new(config: C, results: Vec<Row>, summary: Value) -> Self {
        Self { schema: SCHEMA, config, results, summary }
    }

    pub fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Json => serde_json::to_string_pretty(self).map(|s| s + "\n").map_err(|e| e.to_string()),
            Format::Csv => csv_table(&self.results),
        }
    }

    /// Writes to `out`, or to stdout when `None`.
    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), String> {
        let text = self.render(format)?;
        match out {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
        }
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(other) => other.to_string(),
    }
}

/// Header is the union of the row keys in order of first appearance.
fn csv_table(rows: &[Row]) -> Result<String, String> {
    let mut header: Vec<&String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !header.contains(&k) {
                header.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(header.iter().map(|k| cell(r.get(*k)))).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn row(v: Value) -> Row {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn csv_flattens_rows() {
        let rows = vec![row(json!({"x": 1.5, "v": [1, 2]})), row(json!({"x": 2, "note": "a,b"}))];
        let t = csv_table(&rows).unwrap();
        assert_eq!(t, "x,v,note\n1.5,\"[1,2]\",\n2,,\"a,b\"\n");
    }

    #[test]
    fn json_has_schema() {
        let d = Document::new(json!({"k": 1}), vec![], json!({}));
        let v: Value = serde_json::from_str(&d.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert!(v["results"].as_array().unwrap().is_empty());
    }
}
