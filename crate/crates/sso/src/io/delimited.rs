use std::io::Read;

use sso_core::DenseMatrix;

use super::{IoError, Result};

fn records<R: Read>(reader: R) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            IoError::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

/// A first record with any non-numeric field is a header.
fn is_header(rec: &csv::StringRecord) -> bool {
    rec.iter().any(|f| f.parse::<f64>().is_err())
}

/// Reads a comma-separated numeric matrix. A header row is detected by a
/// non-numeric first line and skipped.
pub fn read_csv_matrix<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut recs = records(reader)?;
    if recs.first().is_some_and(|(_, r)| is_header(r)) {
        recs.remove(0);
    }
    let cols = recs.first().map_or(0, |(_, r)| r.len());
    let mut data = Vec::with_capacity(recs.len() * cols);
    for (line, rec) in &recs {
        if rec.len() != cols {
            return Err(IoError::parse(
                *line,
                format!("expected {cols} fields, found {}", rec.len()),
            ));
        }
        for field in rec {
            let v = field.parse().map_err(|_| {
                IoError::parse(*line, format!("cannot parse '{field}' as a number"))
            })?;
            data.push(v);
        }
    }
    Ok(DenseMatrix::from_row_major(recs.len(), cols, data)?)
}

/// Reads one nonnegative integer label per line (first field), with an
/// optional header.
pub fn read_labels<R: Read>(reader: R) -> Result<Vec<usize>> {
    let mut recs = records(reader)?;
    if recs
        .first()
        .is_some_and(|(_, r)| r.get(0).is_some_and(|f| f.parse::<usize>().is_err()))
    {
        recs.remove(0);
    }
    recs.iter()
        .map(|(line, rec)| {
            let f = rec.get(0).unwrap_or("");
            f.parse()
                .map_err(|_| IoError::parse(*line, format!("cannot parse label '{f}'")))
        })
        .collect()
}
