//! Deterministic text output: C-style `%.9g` numbers and small CSV/JSON writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

const SIGNIFICANT: usize = 9;

/// Formats like C's `%.9g`, with `nan`, `inf` and `-inf` for non-finite values.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Column-oriented table written as CSV or as a JSON object of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Comment lines written before the header, without the leading `# `.
    pub preamble: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), preamble: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_g(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with numbers in `%.9g` form and
    /// non-finite values as `null`.
    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                let cells: Vec<String> =
                    row.iter().map(|&v| if v.is_finite() { fmt_g(v) } else { "null".into() }).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        let columns = serde_json::to_string(&self.columns).expect("strings serialize");
        format!("{{\"columns\":{columns},\"rows\":[{}]}}\n", rows.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Writes output files under one directory.
pub struct Emitter {
    dir: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Emitter { dir: dir.to_path_buf(), format, written: Vec::new() })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `stem.csv` or `stem.json` plus a `stem.meta.json` sidecar.
    pub fn write_table(&mut self, stem: &str, table: &Table, meta: &impl Serialize) -> Result<PathBuf, CliError> {
        let path = match self.format {
            Format::Csv => self.write_text(&format!("{stem}.csv"), &table.to_csv())?,
            Format::Json => self.write_text(&format!("{stem}.json"), &table.to_json())?,
        };
        let mut meta = serde_json::to_value(meta).expect("metadata serializes");
        if let serde_json::Value::Object(map) = &mut meta {
            map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        }
        self.write_json(&format!("{stem}.meta.json"), &meta)?;
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output documents serialize");
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
