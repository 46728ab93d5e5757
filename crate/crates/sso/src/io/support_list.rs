//! Feasible points as text: a header line `n p`, then one `row col value`
//! line (0-based) per nonzero row.

use std::io::{BufRead, Write};

use sso_core::SupportMatrix;

use super::{IoError, Result};

pub fn write_support_list<W: Write>(w: &mut W, x: &SupportMatrix) -> std::io::Result<()> {
    writeln!(w, "{} {}", x.n_rows(), x.n_cols())?;
    for (i, e) in x.entries().iter().enumerate() {
        if let Some(e) = e {
            writeln!(w, "{} {} {:e}", i, e.col, e.val)?;
        }
    }
    Ok(())
}

pub fn read_support_list<R: BufRead>(reader: R) -> Result<SupportMatrix> {
    let mut shape = None;
    let mut entries: Vec<Option<(usize, f64)>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let no = idx + 1;
        let line = line.map_err(|e| IoError::parse(no, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| IoError::parse(no, format!("cannot parse {what} in '{line}'"));
        match shape {
            None => {
                if toks.len() != 2 {
                    return Err(IoError::parse(no, "expected header 'n p'"));
                }
                let n: usize = toks[0].parse().map_err(|_| bad("n"))?;
                let p: usize = toks[1].parse().map_err(|_| bad("p"))?;
                entries = vec![None; n];
                shape = Some((n, p));
            }
            Some((n, _)) => {
                if toks.len() != 3 {
                    return Err(IoError::parse(no, "expected 'row col value'"));
                }
                let row: usize = toks[0].parse().map_err(|_| bad("row"))?;
                let col: usize = toks[1].parse().map_err(|_| bad("column"))?;
                let val: f64 = toks[2].parse().map_err(|_| bad("value"))?;
                if row >= n {
                    return Err(IoError::parse(
                        no,
                        format!("row {row} out of range for n = {n}"),
                    ));
                }
                if entries[row].is_some() {
                    return Err(IoError::parse(no, format!("row {row} listed twice")));
                }
                entries[row] = Some((col, val));
            }
        }
    }
    let (n, p) = shape.ok_or_else(|| IoError::parse(1, "missing header 'n p'"))?;
    Ok(SupportMatrix::new(n, p, entries)?)
}
