//! CSV encodings of sweep results and likelihood profiles.
//!
//! Reals are written in Rust's shortest round-trip form, so parsing a file
//! back yields bit-identical values. Lines end in `\n`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::simulator::PointRecord;

pub const SWEEP_HEADER: [&str; 5] = [
    "snr_db",
    "trials",
    "errors",
    "error_rate",
    "ambiguous_count",
];
pub const PROFILE_HEADER: [&str; 3] = ["lambda", "score_ml", "metric_ida"];

/// One likelihood-profile row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub lambda: i64,
    pub score_ml: f64,
    pub metric_ida: f64,
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn io_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

pub fn write_sweep_csv<W: Write>(out: W, points: &[PointRecord]) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER)?;
    for p in points {
        w.write_record([
            p.snr_db.to_string(),
            p.trials.to_string(),
            p.errors.to_string(),
            p.error_rate.to_string(),
            p.ambiguous_count.to_string(),
        ])?;
    }
    w.flush()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
        Error::InvalidInput(format!(
            "row {line}: bad {} field",
            SWEEP_HEADER.get(i).unwrap_or(&"?")
        ))
    })
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<PointRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(io_err)?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::InvalidInput(format!(
            "unexpected header {:?}",
            header
        )));
    }
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        points.push(PointRecord {
            snr_db: field(&rec, 0, line)?,
            trials: field(&rec, 1, line)?,
            errors: field(&rec, 2, line)?,
            error_rate: field(&rec, 3, line)?,
            ambiguous_count: field(&rec, 4, line)?,
        });
    }
    Ok(points)
}

pub fn write_profile_csv<W: Write>(out: W, rows: &[ProfileRow]) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(PROFILE_HEADER)?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.score_ml.to_string(),
            r.metric_ida.to_string(),
        ])?;
    }
    w.flush()
}
