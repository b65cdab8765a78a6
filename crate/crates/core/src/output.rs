//! Tabular artifacts and their CSV form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::error::Result;
use crate::svg::{self, Plot};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    /// Missing value, written as an empty field.
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every double
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# key: value` header lines.
    pub notes: Vec<(String, String)>,
    pub plot: Option<Plot>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            plot: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_owned(), value.to_string()));
    }

    pub fn with_plot(mut self, plot: Plot) -> Self {
        self.plot = Some(plot);
        self
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, `NaN` where a row has no number.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// The RFC 4180 body: header row plus data rows.
    pub fn csv_body(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Provenance lines written above every CSV body.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub recipe: String,
    pub config_digest: String,
    pub conventions: String,
    pub timestamp: Option<String>,
}

impl Metadata {
    fn lines(&self, table: &Table) -> Vec<String> {
        let mut v = vec![
            format!("# levmem {VERSION}"),
            format!("# recipe: {}", self.recipe),
            format!("# config_sha256: {}", self.config_digest),
            format!("# conventions: {}", self.conventions),
        ];
        if let Some(ts) = &self.timestamp {
            v.push(format!("# generated: {ts}"));
        }
        v.extend(table.notes.iter().map(|(k, val)| format!("# {k}: {val}")));
        v
    }
}

pub fn render_csv(table: &Table, meta: &Metadata) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for line in meta.lines(table) {
        out.extend_from_slice(line.as_bytes());
        out.extend_from_slice(b"\r\n");
    }
    out.extend(table.csv_body()?);
    Ok(out)
}

/// Write every table (and its plot) into `dir`. Returns the created paths in order.
pub fn write_tables(dir: &Path, tables: &[Table], meta: &Metadata, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        if format.csv() {
            let path = dir.join(format!("{}.csv", t.name));
            fs::File::create(&path)?.write_all(&render_csv(t, meta)?)?;
            written.push(path);
        }
        if format.svg() {
            if let Some(plot) = &t.plot {
                let path = dir.join(format!("{}.svg", t.name));
                fs::write(&path, svg::render(t, plot)?)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Strip the `#` header lines, leaving the byte-comparable body.
pub fn strip_metadata(csv: &[u8]) -> &[u8] {
    let mut rest = csv;
    while rest.first() == Some(&b'#') {
        match rest.iter().position(|&b| b == b'\n') {
            Some(i) => rest = &rest[i + 1..],
            None => return &[],
        }
    }
    rest
}
