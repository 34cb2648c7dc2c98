//! Streaming rows followed by a closing envelope.
//!
//! JSON output is one object per line: `{"type":"row",…}` for each row and a
//! final `{"type":"envelope",…}`. CSV output writes rows to stdout and the
//! envelope to stderr. Nested objects are flattened with `_` separators and
//! every `{value, err}` enclosure becomes a `name` column plus `name_err`.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Format;

pub struct Output {
    format: Format,
    command: &'static str,
    header: Option<Vec<String>>,
    csv: csv::Writer<io::Stdout>,
    error: Option<io::Error>,
}

fn is_enclosure(m: &Map<String, Value>) -> bool {
    m.len() == 2 && m.contains_key("value") && m.contains_key("err")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let name = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}_{k}") };
    match v {
        Value::Object(m) if is_enclosure(m) => {
            out.push((prefix.to_string(), scalar(&m["value"])));
            out.push((format!("{prefix}_err"), scalar(&m["err"])));
        }
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&name(k), x, out);
            }
        }
        Value::Array(items) if items.len() == 2 && items.iter().all(Value::is_number) && !prefix.is_empty() => {
            out.push((format!("{prefix}_lo"), scalar(&items[0])));
            out.push((format!("{prefix}_hi"), scalar(&items[1])));
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

pub fn flat_columns(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten("", v, &mut out);
    out
}

impl Output {
    pub fn new(format: Format, command: &'static str) -> Self {
        Output { format, command, header: None, csv: csv::Writer::from_writer(io::stdout()), error: None }
    }

    /// As [`Output::row`] for use inside callbacks; the first failure is
    /// reported by [`Output::finish`].
    pub fn push(&mut self, row: &impl Serialize) {
        if self.error.is_none() {
            self.error = self.row(row).err();
        }
    }

    pub fn row(&mut self, row: &impl Serialize) -> io::Result<()> {
        let v = serde_json::to_value(row)?;
        match self.format {
            Format::Json => {
                let line = json!({ "type": "row", "command": self.command, "data": v });
                let mut out = io::stdout().lock();
                writeln!(out, "{line}")?;
                out.flush()
            }
            Format::Csv | Format::Table => {
                let cols = flat_columns(&v);
                if self.header.is_none() {
                    let names: Vec<String> = cols.iter().map(|c| c.0.clone()).collect();
                    self.write_record(&names)?;
                    self.header = Some(names);
                }
                let values: Vec<String> = cols.into_iter().map(|c| c.1).collect();
                self.write_record(&values)
            }
        }
    }

    fn write_record(&mut self, fields: &[String]) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                self.csv.write_record(fields)?;
                self.csv.flush()
            }
            _ => {
                let mut out = io::stdout().lock();
                writeln!(out, "{}", fields.join("\t"))?;
                out.flush()
            }
        }
    }

    pub fn finish(mut self, envelope: &Value) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.csv.flush()?;
        match self.format {
            Format::Json => {
                let mut out = io::stdout().lock();
                writeln!(out, "{envelope}")?;
                out.flush()
            }
            Format::Csv => writeln!(io::stderr().lock(), "{envelope}"),
            Format::Table => {
                let mut out = io::stdout().lock();
                if self.header.is_some() {
                    writeln!(out)?;
                }
                writeln!(out, "{}", serde_json::to_string_pretty(envelope)?)?;
                out.flush()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enclosures_get_err_columns() {
        let v = json!({"n": 3, "gap": {"value": 0.5, "err": 1e-30}, "bound": {"depth": 4, "lower_count": 1}, "r": [1.0, 2.0], "x": null});
        let cols = flat_columns(&v);
        let names: Vec<&str> = cols.iter().map(|c| c.0.as_str()).collect();
        assert_eq!(names, ["n", "gap", "gap_err", "bound_depth", "bound_lower_count", "r_lo", "r_hi", "x"]);
        assert_eq!(cols[2].1, "1e-30");
        assert_eq!(cols[7].1, "");
    }
}
