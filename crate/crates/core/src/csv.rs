//! Deterministic CSV emission: 12 significant digits, `.` separator and
//! `#`-prefixed header comments.

use std::io::Write;

use crate::error::Result;

/// Formats with 12 significant digits in scientific notation. Negative zero
/// prints as zero so repeated runs stay byte-identical across sign noise.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

pub fn format_flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// A table with comment lines, a column header and pre-formatted rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { comments: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| format_number(*v)).collect());
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(format_number(1e-20), "1.00000000000e-20");
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.comments.push("mode = unitary".into());
        t.push_numbers(&[1.0, -2.5]);
        assert_eq!(t.to_string_lossy(), "# mode = unitary\na,b\n1.00000000000e0,-2.50000000000e0\n");
    }
}
