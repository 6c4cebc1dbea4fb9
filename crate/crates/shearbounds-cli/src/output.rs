//! CSV and JSON emitters for sweep rows, plus a JSON reader for round trips.
//!
//! Numbers are written in shortest round-trip decimal form; absent values
//! stay empty in CSV and `null` in JSON. Column order is fixed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::sweep::BoundsRow;

pub const CSV_HEADER: &str =
    "f,N,method,mu_lower,mu_upper,c_lower,c_upper,rho_avg,backend,condition_estimate,error";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(mut w: W, rows: &[BoundsRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.f,
            r.n,
            csv_field(&r.method),
            opt(r.mu_lower),
            opt(r.mu_upper),
            opt(r.c_lower),
            opt(r.c_upper),
            r.rho_avg,
            csv_field(&r.backend),
            opt(r.condition_estimate),
            csv_field(r.error.as_deref().unwrap_or("")),
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write>(mut w: W, rows: &[BoundsRow]) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, rows)?;
    writeln!(w)
}

/// Write the rows to `path` in the requested format.
pub fn write_output(rows: &[BoundsRow], format: OutputFormat, path: &Path) -> io::Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(&mut w, rows)?,
        OutputFormat::Json => write_json(&mut w, rows)?,
    }
    w.flush()
}

pub fn read_json(path: &Path) -> io::Result<Vec<BoundsRow>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(io::Error::other)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> BoundsRow {
        BoundsRow {
            f: 0.25,
            n: 3,
            method: "mm".into(),
            mu_lower: Some(1.25),
            mu_upper: Some(1.5),
            c_lower: Some(1.118033988749895),
            c_upper: Some(1.224744871391589),
            rho_avg: 1.0,
            backend: "piecewise_exp+half".into(),
            condition_estimate: Some(123.0),
            error: None,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_has_eleven_columns() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line.split(',').count(), 11);
        assert!(line.starts_with("0.25,3,mm,1.25,1.5,"));
    }

    #[test]
    fn error_fields_are_quoted() {
        let mut r = row();
        r.mu_lower = None;
        r.error = Some("bad, \"things\" happened".into());
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"bad, \"\"things\"\" happened\""));
        // empty optional stays empty
        assert!(text.lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rows = vec![row()];
        let dir = std::env::temp_dir().join("shearbounds-output-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rows.json");
        write_output(&rows, OutputFormat::Json, &path).unwrap();
        let back = read_json(&path).unwrap();
        assert_eq!(rows, back);
    }
}
