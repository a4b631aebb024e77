//! Artifact serialization: RFC-4180 CSV, JSON documents, file placement.

use num_rational::BigRational;
use std::io;
use std::path::{Path, PathBuf};

/// A CSV table with a fixed column set, CRLF line endings, and quoting
/// exactly where the format demands it.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    body: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Csv {
        let mut csv = Csv {
            columns: columns.len(),
            body: String::new(),
        };
        csv.raw_row(columns.iter().map(|c| (*c).to_string()));
        csv
    }

    pub fn row<I>(&mut self, cells: I)
    where
        I: IntoIterator<Item = String>,
    {
        self.raw_row(cells);
    }

    fn raw_row<I>(&mut self, cells: I)
    where
        I: IntoIterator<Item = String>,
    {
        let encoded: Vec<String> = cells.into_iter().map(|c| encode_field(&c)).collect();
        assert_eq!(encoded.len(), self.columns, "row width mismatch");
        self.body.push_str(&encoded.join(","));
        self.body.push_str("\r\n");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.body.into_bytes()
    }
}

fn encode_field(field: &str) -> String {
    if field.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Exact rational as `p/q`, the lossless serialization used in artifacts.
pub fn rational_text(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Fixed-precision decimal rendering for the human-facing columns.
pub fn approx_text(value: f64) -> String {
    format!("{value:.6}")
}

/// Writes one artifact, creating the directory as needed, and returns its
/// path.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)?;
    Ok(path)
}

/// Serializes one JSON document with a trailing newline. Keys come out
/// sorted because the underlying map is ordered.
pub fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable value");
    bytes.push(b'\n');
    bytes
}
