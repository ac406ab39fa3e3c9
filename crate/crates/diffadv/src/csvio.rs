//! Reproducible CSV emission and parsing.
//!
//! Every emitted file starts with `#`-prefixed comment lines carrying the
//! tool version, subcommand, config hash and seed, followed by a column
//! header and numeric rows. Floats print with 17 significant digits
//! (lowercase exponent, `.` separator) so values round-trip bit for bit;
//! writes go to a temporary file renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::SimError;

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Self::Int(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Self::Int(v as u64)
    }
}

/// 17-significant-digit float formatting; round-trips through `parse`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// CSV document builder.
#[derive(Debug, Default)]
pub struct CsvWriter {
    buf: String,
    header_written: bool,
}

impl CsvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a `# `-prefixed comment line (before the header).
    pub fn comment(&mut self, line: &str) {
        debug_assert!(!self.header_written, "comments precede the header");
        let _ = writeln!(self.buf, "# {line}");
    }

    pub fn header(&mut self, columns: &[&str]) {
        debug_assert!(!self.header_written);
        let _ = writeln!(self.buf, "{}", columns.join(","));
        self.header_written = true;
    }

    pub fn row(&mut self, fields: &[Field]) {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            match f {
                Field::Float(v) => self.buf.push_str(&format_float(*v)),
                Field::Int(v) => {
                    let _ = write!(self.buf, "{v}");
                }
            }
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Parsed CSV document; all cells as f64.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Parse a document produced by [`CsvWriter`].
pub fn parse_csv(text: &str) -> Result<CsvTable, SimError> {
    let mut comments = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            comments.push(comment.trim_start().to_string());
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(cols) => {
                let row: Result<Vec<f64>, _> =
                    line.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let row = row.map_err(|e| {
                    SimError::Invalid(format!("csv line {}: {e}", ln + 1))
                })?;
                if row.len() != cols.len() {
                    return Err(SimError::Invalid(format!(
                        "csv line {}: {} fields, header has {}",
                        ln + 1,
                        row.len(),
                        cols.len()
                    )));
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| SimError::Invalid("csv has no header row".into()))?;
    Ok(CsvTable { comments, columns, rows })
}

pub fn read_csv(path: &Path) -> Result<CsvTable, SimError> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Write through a temporary sibling and rename into place, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}
