//! CSV and JSON emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use birkhoff_spectrum::ExtReal;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn ext_json(x: ExtReal) -> Value {
    match x {
        ExtReal::Finite(v) => json!(v),
        ExtReal::PosInfinity => json!("inf"),
        ExtReal::NegInfinity => json!("-inf"),
    }
}

/// Sidecar path of the JSON header next to a CSV data file.
pub fn header_path(out: &Path) -> PathBuf {
    out.with_extension("header.json")
}

/// Fail early when the output directory cannot be written.
pub fn check_writable(out: &Path) -> Result<()> {
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let meta = std::fs::metadata(&dir).with_context(|| format!("output directory {} does not exist", dir.display()))?;
    if !meta.is_dir() || meta.permissions().readonly() {
        anyhow::bail!("output directory {} is not writable", dir.display());
    }
    Ok(())
}

/// Tabular data plus the metadata that accompanies it.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Numeric mirror of `rows` for JSON output.
    pub json_rows: Vec<Value>,
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner()?)
}

/// Write the table as CSV (with a JSON header sidecar) or as one JSON document.
/// Without `out`, the data goes to stdout and no sidecar is written.
pub fn emit(table: &Table, header: Value, format: crate::config::Format, out: Option<&Path>) -> Result<()> {
    use crate::config::Format;
    let body = match format {
        Format::Csv => csv_bytes(table)?,
        Format::Json => {
            let mut doc = header.clone();
            doc["columns"] = json!(table.columns);
            doc["rows"] = Value::Array(table.json_rows.clone());
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    match out {
        Some(path) => {
            std::fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?;
            if format == Format::Csv {
                let mut s = serde_json::to_string_pretty(&header)?;
                s.push('\n');
                let hp = header_path(path);
                std::fs::write(&hp, s).with_context(|| format!("writing {}", hp.display()))?;
            }
        }
        None => std::io::stdout().write_all(&body)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            header_path(Path::new("out/curve.csv")),
            PathBuf::from("out/curve.header.json")
        );
    }
}
