//! Report files.
//!
//! CSV rows carry every number with 17 significant digits. JSON mirrors the
//! same fields; serde_json prints the shortest representation that reads
//! back to the identical double, so both files hold the same values.

use std::io::Write;
use std::path::Path;

use anyhow::{Context as _, Result};

use hubbard_core::report::CheckRecord;

use crate::config::Format;

pub const COLUMNS: [&str; 9] = [
    "claim_id", "lattice", "params", "quantity", "lhs", "rhs", "margin", "verdict", "seconds",
];

pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[CheckRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.claim_id.as_str(),
            &r.lattice,
            &r.params,
            &r.quantity,
            &number(r.lhs),
            &number(r.rhs),
            &number(r.margin),
            &r.verdict.to_string(),
            &number(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[CheckRecord], mut sink: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut sink, rows)?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn render(rows: &[CheckRecord], format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, &mut buf)?,
    }
    Ok(buf)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}
