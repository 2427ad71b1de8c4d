//! CSV and JSON emission. Floats carry 17 significant digits so every value
//! reads back bit-exactly; files are written to a temporary sibling and
//! renamed into place.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use tempfile::NamedTempFile;

use crate::CliError;

/// `x` with 17 significant digits, e.g. `-3.1415926535897931e0`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty for `None` and for non-finite values.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(fmt_f64).unwrap_or_default()
}

struct Sig17<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

fn serialize<T: Serialize, F: Formatter>(value: &T, formatter: F) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sig17(formatter));
    value.serialize(&mut ser).map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
    Ok(buf)
}

/// Indented JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serialize(value, PrettyFormatter::new())?;
    buf.push(b'\n');
    Ok(buf)
}

/// Single-line JSON without a trailing newline.
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String, CliError> {
    let buf = serialize(value, serde_json::ser::CompactFormatter)?;
    String::from_utf8(buf).map_err(|e| CliError::Numeric(e.to_string()))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io_err = |e: io::Error| CliError::Numeric(format!("cannot write {}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &to_json_bytes(value)?)
}

/// A header row and string cells, already formatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Numeric(format!("csv encoding failed: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                return Err(CliError::Numeric(format!(
                    "csv row has {} cells, header has {}",
                    row.len(),
                    self.header.len()
                )));
            }
            w.write_record(row).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Numeric(format!("csv encoding failed: {e}")))
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &table.to_csv_bytes()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX, 8751.414399306443] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            assert_eq!(s.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
        }
    }

    #[test]
    fn json_floats_use_the_fixed_width_form() {
        let line = to_json_line(&serde_json::json!({"x": 0.5, "n": 3, "nan": f64::NAN})).unwrap();
        assert_eq!(line, r#"{"n":3,"nan":null,"x":5.0000000000000000e-1}"#);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "status"]);
        assert_eq!(t.to_csv_bytes().unwrap(), b"a,status\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into()]);
        assert!(t.to_csv_bytes().is_err());
    }
}
