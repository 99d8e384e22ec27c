//! Sample file formats. Floats are written in Rust's shortest round-trip
//! form, so reading a file back gives bit-identical values.

use std::io::{self, Write};

use serde_json::{json, Map, Value};

use super::ChainResult;

/// CSV with a header of coordinate names and one row per kept step.
pub fn write_csv<W: Write>(chain: &ChainResult, out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", chain.coords.join(","))?;
    let mut line = String::new();
    for row in &chain.samples {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:?}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// One JSON object per kept step: the state keyed by coordinate name plus
/// the step record. Non-finite numbers are written as `null`.
pub fn write_jsonl<W: Write>(chain: &ChainResult, out: &mut W) -> io::Result<()> {
    for (row, meta) in chain.samples.iter().zip(&chain.meta) {
        let state: Map<String, Value> = chain
            .coords
            .iter()
            .cloned()
            .zip(row.iter().map(|&v| num(v)))
            .collect();
        let obj = json!({
            "state": state,
            "accepted": meta.accepted,
            "log_density": num(meta.log_density),
            "flips": meta.flips.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "crossings": meta.crossings,
            "energy_error": num(meta.energy_error),
            "density_evals": meta.density_evals,
        });
        writeln!(out, "{obj}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }
}

/// Parse a sample CSV written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<CsvTable, String> {
    let mut lines = text.lines();
    let header: Vec<String> = match lines.next() {
        Some("") => Vec::new(),
        Some(h) => h.split(',').map(str::to_string).collect(),
        None => return Err("empty file".into()),
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("row {}: {e}", n + 1))?;
        if row.len() != header.len() {
            return Err(format!(
                "row {} has {} fields, header has {}",
                n + 1,
                row.len(),
                header.len()
            ));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

/// Read the states of a JSONL file written by [`write_jsonl`]. Columns
/// are the first line's state keys in sorted order; `null` reads as NaN.
pub fn read_jsonl(text: &str) -> Result<CsvTable, String> {
    let mut header: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        let state = v
            .get("state")
            .and_then(Value::as_object)
            .ok_or_else(|| format!("line {}: missing `state` object", n + 1))?;
        if rows.is_empty() {
            header = state.keys().cloned().collect();
        }
        if state.len() != header.len() {
            return Err(format!(
                "line {}: state has {} entries, expected {}",
                n + 1,
                state.len(),
                header.len()
            ));
        }
        let row = header
            .iter()
            .map(|k| match state.get(k) {
                Some(Value::Null) => Ok(f64::NAN),
                Some(x) => x
                    .as_f64()
                    .ok_or_else(|| format!("line {}: `{k}` is not a number", n + 1)),
                None => Err(format!("line {}: missing coordinate `{k}`", n + 1)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}
