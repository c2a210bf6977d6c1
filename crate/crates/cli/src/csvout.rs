//! Deterministic CSV assembly: `#`-prefixed metadata comments, independent
//! variables first, data floats at 12 significant digits, no timestamps.

use std::fmt::Write as _;

/// One CSV document under construction.
pub struct Csv {
    comments: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<String>,
}

/// A single cell value.
pub enum Cell {
    Float(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 12 significant digits; `nan` for undefined cells.
pub fn fmt_float(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value == 0.0 {
        // Normalise the sign of zero for byte-stable output.
        return format!("{:.11e}", 0.0f64);
    }
    format!("{value:.11e}")
}

impl Csv {
    pub fn new(command: &str, columns: Vec<&'static str>) -> Self {
        Self {
            comments: vec![format!("command = {command}")],
            columns,
            rows: Vec::new(),
        }
    }

    /// Echo a key=value binding into the metadata block. Values are written
    /// verbatim, so numeric bindings round-trip exactly.
    pub fn echo(&mut self, key: &str, value: &str) {
        self.comments.push(format!("{key} = {value}"));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn push_row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row/column mismatch");
        let mut row = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                row.push(',');
            }
            match cell {
                Cell::Float(v) => row.push_str(&fmt_float(*v)),
                Cell::Int(v) => {
                    let _ = write!(row, "{v}");
                }
                Cell::Flag(v) => row.push_str(if *v { "1" } else { "0" }),
                Cell::Text(v) => row.push_str(v),
            }
        }
        self.rows.push(row);
    }
}

impl std::fmt::Display for Csv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for comment in &self.comments {
            writeln!(f, "# {comment}")?;
        }
        writeln!(f, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.0625), "6.25000000000e-2");
        assert_eq!(fmt_float(-1.0 / 3.0), "-3.33333333333e-1");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
        assert_eq!(fmt_float(-0.0), "0.00000000000e0");
        assert_eq!(fmt_float(f64::NAN), "nan");
    }

    #[test]
    fn document_layout() {
        let mut csv = Csv::new("spectrum", vec!["nu", "variance", "diverged"]);
        csv.echo("eps", "0.75");
        csv.push_row(vec![Cell::Float(0.5), Cell::Float(0.25), Cell::Flag(false)]);
        let text = csv.to_string();
        assert!(text.starts_with("# command = spectrum\n# eps = 0.75\nnu,variance,diverged\n"));
        assert!(text.ends_with("5.00000000000e-1,2.50000000000e-1,0\n"));
    }
}
