//! Plain CSV tables of floating-point columns.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Self { headers, rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(csv_err)?;
        let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        message: format!("data row {}: `{s}` is not a number", line + 1),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    /// Writes with 9 significant digits per value.
    pub fn write(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io { path: path.to_path_buf(), source };
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        writeln!(w, "{}", self.headers.join(",")).map_err(io_err)?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            writeln!(w, "{}", line.join(",")).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

/// Position in millimetres encoded in a column name such as `p_146mm_bar` or
/// `T_2.2mm_C`: the number between the first `_` and `mm`.
pub fn position_mm_from_header(header: &str) -> Option<f64> {
    let rest = header.split_once('_')?.1;
    let end = rest.find("mm")?;
    rest[..end].parse().ok()
}

/// Column name for a position in millimetres, inverse of `position_mm_from_header`.
pub fn header_for_position(prefix: &str, x_m: f64, suffix: &str) -> String {
    let mm = x_m * 1e3;
    let mm = (mm * 1e6).round() / 1e6;
    if suffix.is_empty() {
        format!("{prefix}_{mm}mm")
    } else {
        format!("{prefix}_{mm}mm_{suffix}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_nine_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.rows.push(vec![1.0 / 3.0, -2.5e-7]);
        t.rows.push(vec![0.0, 123456789.123]);
        t.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back.headers, t.headers);
        for (r, s) in back.rows.iter().zip(&t.rows) {
            for (a, b) in r.iter().zip(s) {
                assert_eq!(format_value(*a), format_value(*b));
                assert!((a - b).abs() <= 1e-8 * b.abs());
            }
        }
    }

    #[test]
    fn header_positions() {
        assert_eq!(position_mm_from_header("p_146mm_bar"), Some(146.0));
        assert_eq!(position_mm_from_header("T_2.2mm_C"), Some(2.2));
        assert_eq!(position_mm_from_header("time_s"), None);
        assert_eq!(header_for_position("p", 0.032, "bar"), "p_32mm_bar");
        assert_eq!(header_for_position("T", 0.0022, "C"), "T_2.2mm_C");
    }

    #[test]
    fn non_numeric_cell_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n3,x\n").unwrap();
        let err = Table::read(&path).unwrap_err().to_string();
        assert!(err.contains("data row 2"), "{err}");
    }
}
