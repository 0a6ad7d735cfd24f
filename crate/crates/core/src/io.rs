//! CSV output (15 significant digits, LF endings) and a strict numeric reader.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Field;

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_string<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&x| fmt_num(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv<R: AsRef<[f64]>>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    std::fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// Columns x followed by each named field, all on one grid.
pub fn fields_csv(cols: &[(&str, &Field)]) -> Result<String> {
    let Some((_, first)) = cols.first() else {
        return Err(Error::NoData("no columns".into()));
    };
    for (_, f) in cols {
        f.require_same_grid(first)?;
    }
    let mut header = vec!["x"];
    header.extend(cols.iter().map(|(n, _)| *n));
    let g = first.grid;
    let rows = (0..g.n).map(|i| {
        let mut r = vec![g.x(i)];
        r.extend(cols.iter().map(|(_, f)| f.values[i]));
        r
    });
    Ok(csv_string(&header, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Parses one numeric CSV field; accepts the `nan`/`inf` spellings written above.
pub fn parse_field(s: &str) -> Option<f64> {
    let t = s.trim();
    match t {
        "nan" | "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ if t.is_empty() || t.bytes().any(|b| b.is_ascii_alphabetic() && b != b'e' && b != b'E') => None,
        _ => t.parse().ok(),
    }
}

/// Header row of names, then rows of numbers with the same width.
pub fn parse_csv(text: &str) -> Result<Table> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, head)) = lines.next() else {
        return Err(Error::NoData("empty CSV".into()));
    };
    let header: Vec<String> = head.split(',').map(|h| h.trim().to_string()).collect();
    if header.iter().any(|h| h.is_empty()) {
        return Err(Error::Domain("empty column name in CSV header".into()));
    }
    let mut rows = Vec::new();
    let mut msg = String::new();
    for (ln, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            let _ = write!(msg, "line {}: {} fields, expected {}", ln + 1, cells.len(), header.len());
            return Err(Error::Domain(msg));
        }
        let mut row = Vec::with_capacity(cells.len());
        for (j, c) in cells.iter().enumerate() {
            match parse_field(c) {
                Some(x) => row.push(x),
                None => return Err(Error::Domain(format!("line {}: column `{}`: bad number `{c}`", ln + 1, header[j]))),
            }
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    parse_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = csv_string(&["a", "b"], [[1.0, -2.5e-300], [f64::NAN, 3.0]]);
        assert!(!s.contains('\r'));
        let t = parse_csv(&s).unwrap();
        assert_eq!(t.rows[0], vec![1.0, -2.5e-300]);
        assert!(t.rows[1][0].is_nan());
    }

    #[test]
    fn rejects_ragged_and_words() {
        assert!(parse_csv("a,b\n1\n").is_err());
        assert!(parse_csv("a\nabc\n").is_err());
        assert!(parse_csv("a\n0x10\n").is_err());
        assert!(matches!(parse_csv(""), Err(Error::NoData(_))));
    }
}
