//! Flat tables of serializable rows, written as CSV or JSON.
//!
//! Nested fields are flattened into dotted column names. CSV output is a
//! header row plus records with a leading `schema_version` column; JSON is
//! `{schema_version, metadata, rows}`. The only non-deterministic value is
//! `metadata.generated_unix`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Precondition(format!("unknown format {s:?} (csv or json)"))),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub metadata: BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Map<String, Value>>,
}

fn flatten_into(prefix: &str, v: Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                // an internally tagged enum repeats its field name: mode.mode → mode
                let key = if prefix.is_empty() || prefix.rsplit('.').next() == Some(k.as_str()) {
                    if prefix.is_empty() {
                        k
                    } else {
                        prefix.to_string()
                    }
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other);
        }
    }
}

/// A serializable value as a single-level map with dotted keys.
pub fn flatten<T: Serialize>(row: &T) -> Result<Map<String, Value>> {
    let v = serde_json::to_value(row).map_err(|e| Error::Precondition(format!("unserializable row: {e}")))?;
    let mut out = Map::new();
    match v {
        Value::Object(_) => flatten_into("", v, &mut out),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            metadata: BTreeMap::new(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Report {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push<T: Serialize>(&mut self, row: &T) -> Result<()> {
        let flat = flatten(row)?;
        for k in flat.keys() {
            if !self.columns.iter().any(|c| c == k) {
                self.columns.push(k.clone());
            }
        }
        self.rows.push(flat);
        Ok(())
    }

    pub fn extend<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        rows.iter().try_for_each(|r| self.push(r))
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Map<String, Value>] {
        &self.rows
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::Precondition(format!("csv: {e}"));
        let mut header = vec!["schema_version".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(fail)?;
        for row in &self.rows {
            let mut rec = vec![SCHEMA_VERSION.to_string()];
            rec.extend(self.columns.iter().map(|c| row.get(c).map(cell).unwrap_or_default()));
            w.write_record(&rec).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Precondition(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// JSON document; `generated_unix` is set when `stamp` is true.
    pub fn to_json(&self, stamp: bool) -> Result<String> {
        let mut meta: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        meta.insert("command".into(), Value::String(self.command.clone()));
        if stamp {
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            meta.insert("generated_unix".into(), Value::from(now));
        }
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "metadata": meta,
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Precondition(format!("json: {e}")))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(true),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        let text = self.render(format)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.display().to_string(),
                msg: e.to_string(),
            })?;
        }
        fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Inner {
        a: f64,
        b: Option<u32>,
    }

    #[derive(Serialize)]
    #[serde(tag = "kind", rename_all = "lowercase")]
    enum Tagged {
        Plain,
    }

    #[derive(Serialize)]
    struct Row {
        name: String,
        inner: Inner,
        list: Vec<i64>,
        kind: Tagged,
    }

    fn sample() -> Report {
        let mut r = Report::new("test");
        r.meta("q", 5);
        r.push(&Row {
            name: "x, \"quoted\"".into(),
            inner: Inner { a: 0.5, b: None },
            list: vec![1, -2],
            kind: Tagged::Plain,
        })
        .unwrap();
        r
    }

    #[test]
    fn nested_keys_flatten() {
        let r = sample();
        assert_eq!(r.columns(), ["name", "inner.a", "inner.b", "list", "kind"]);
    }

    #[test]
    fn csv_quotes_and_reads_back() {
        let text = sample().to_csv().unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let h = rd.headers().unwrap().clone();
        assert_eq!(&h[0], "schema_version");
        let rec = rd.records().next().unwrap().unwrap();
        assert_eq!(&rec[1], "x, \"quoted\"");
        assert_eq!(&rec[4], "1 -2");
        assert_eq!(&rec[3], "");
    }

    #[test]
    fn json_has_schema_and_metadata() {
        let v: Value = serde_json::from_str(&sample().to_json(false).unwrap()).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["metadata"]["q"], "5");
        assert_eq!(v["rows"][0]["inner.a"], 0.5);
        assert!(v["metadata"].get("generated_unix").is_none());
    }
}
