//! CSV output: header line, comma-separated rows, `\n` terminator.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::Int(v as i64)
    }
}

/// Shortest decimal that parses back to the same `f64`.
///
/// Plain notation in `[1e-5, 1e16)`, exponent notation outside it so that
/// tiny and huge values stay short.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Real(v) => format_real(*v),
            Field::Text(s) => s.clone(),
        }
    }
}

/// Writes `header` and then every row to `out`.
pub fn write_csv<W, I>(out: W, header: &[&str], rows: I) -> Result<W>
where
    W: Write,
    I: IntoIterator<Item = Vec<Field>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(err) => CliError::io("writing CSV", err),
        other => CliError::parse("csv", format!("{other:?}")),
    };
    w.write_record(header).map_err(io)?;
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != header.len() {
            return Err(CliError::parse(
                "csv",
                format!(
                    "row {i} has {} fields, schema has {}",
                    row.len(),
                    header.len()
                ),
            ));
        }
        w.write_record(row.iter().map(Field::render)).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| CliError::io("writing CSV", e.into_error()))
}

/// Reads the last column of a CSV file with a header row as reals.
pub fn read_real_column(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::parse("ic", format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse("ic", format!("{}: {e}", path.display())))?;
        let cell = rec.iter().next_back().unwrap_or("");
        let v = cell
            .trim()
            .parse::<f64>()
            .map_err(|e| CliError::parse("ic", format!("{} row {}: {e}", path.display(), i + 1)))?;
        values.push(v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let out = write_csv(Vec::new(), &["k", "omega"], Vec::<Vec<Field>>::new()).unwrap();
        assert_eq!(out, b"k,omega\n");
    }

    #[test]
    fn one_row() {
        let out = write_csv(
            Vec::new(),
            &["k", "omega"],
            [vec![Field::Int(0), Field::Real(1.0)]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "k,omega\n0,1\n");
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(-0.0625), "-0.0625");
        assert_eq!(format_real(0.35355339059327373), "0.35355339059327373");
        assert_eq!(format_real(1.089e-5), "0.00001089");
        assert_eq!(format_real(1e-300), "1e-300");
        assert_eq!(format_real(2.5e20), "2.5e20");
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        assert!(write_csv(Vec::new(), &["a", "b"], [vec![Field::Int(1)]]).is_err());
    }
}
