use std::io::{BufRead, Write};

use sso_core::DenseMatrix;

use super::{IoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

struct Header {
    layout: Layout,
    symmetric: bool,
}

fn parse_header(line: &str) -> Result<Header> {
    let words: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(IoError::parse(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(IoError::parse(1, format!("unsupported layout '{other}'"))),
    };
    match words[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(IoError::parse(1, format!("unsupported field '{other}'"))),
    }
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(IoError::parse(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header { layout, symmetric })
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| IoError::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| IoError::parse(line, format!("cannot parse {what} '{tok}'")))
}

/// Reads a real Matrix Market file (coordinate or array, general or
/// symmetric) into a dense matrix. Symmetric storage is expanded.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DenseMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = match lines.next() {
        Some((_, line)) => parse_header(&line.map_err(|e| IoError::parse(1, e.to_string()))?)?,
        None => return Err(IoError::parse(1, "empty file")),
    };
    // Data lines, skipping comments and blanks.
    let mut data = lines.filter_map(|(no, line)| match line {
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('%')).then(|| Ok((no, t.to_string())))
        }
        Err(e) => Some(Err(IoError::parse(no, e.to_string()))),
    });

    let (size_no, size_line) = data
        .next()
        .ok_or_else(|| IoError::parse(2, "missing size line"))??;
    let mut toks = size_line.split_whitespace();
    let rows: usize = number(toks.next(), size_no, "row count")?;
    let cols: usize = number(toks.next(), size_no, "column count")?;
    if header.symmetric && rows != cols {
        return Err(IoError::Shape(format!(
            "symmetric matrix must be square, got {rows} x {cols}"
        )));
    }
    let mut m = DenseMatrix::zeros(rows, cols);

    match header.layout {
        Layout::Coordinate => {
            let nnz: usize = number(toks.next(), size_no, "entry count")?;
            let mut seen = 0;
            for item in data {
                let (no, line) = item?;
                if seen == nnz {
                    return Err(IoError::parse(no, "more entries than declared"));
                }
                let mut t = line.split_whitespace();
                let i: usize = number(t.next(), no, "row index")?;
                let j: usize = number(t.next(), no, "column index")?;
                let v: f64 = number(t.next(), no, "value")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(IoError::parse(no, format!("index ({i}, {j}) out of range")));
                }
                if header.symmetric && j > i {
                    return Err(IoError::parse(
                        no,
                        "symmetric storage must be lower triangular",
                    ));
                }
                m[(i - 1, j - 1)] = v;
                if header.symmetric {
                    m[(j - 1, i - 1)] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(IoError::Shape(format!(
                    "declared {nnz} entries, found {seen}"
                )));
            }
        }
        Layout::Array => {
            // Column-major; symmetric files store the lower triangle only.
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if header.symmetric { j } else { 0 };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut next = positions.iter();
            for item in data {
                let (no, line) = item?;
                for tok in line.split_whitespace() {
                    let &(i, j) = next
                        .next()
                        .ok_or_else(|| IoError::parse(no, "more values than the declared size"))?;
                    let v: f64 = number(Some(tok), no, "value")?;
                    m[(i, j)] = v;
                    if header.symmetric {
                        m[(j, i)] = v;
                    }
                }
            }
            let missing = next.count();
            if missing > 0 {
                return Err(IoError::Shape(format!(
                    "{missing} values missing from array body"
                )));
            }
        }
    }
    Ok(m)
}

/// Writes `m` in Matrix Market array (column-major, general) layout.
pub fn write_matrix_market<W: Write>(w: &mut W, m: &DenseMatrix) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(w, "{:e}", m[(i, j)])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<DenseMatrix> {
        read_matrix_market(s.as_bytes())
    }

    #[test]
    fn array_is_column_major() {
        let m = read("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(
            m,
            DenseMatrix::from_rows(&[&[1.0, 3.0], &[2.0, 4.0]]).unwrap()
        );
    }

    #[test]
    fn symmetric_coordinate_is_expanded() {
        let src = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 1\n2 1 5\n";
        let m = read(src).unwrap();
        assert_eq!(m[(0, 1)], 5.0);
        assert_eq!(m[(1, 0)], 5.0);
        assert_eq!(m[(0, 0)], 0.0);
    }

    #[test]
    fn symmetric_array_reads_lower_triangle() {
        let src = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let m = read(src).unwrap();
        assert_eq!(
            m,
            DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 3.0]]).unwrap()
        );
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let src = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 3.0\n";
        match read(src) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let src = "%%MatrixMarket matrix array real general\n1 2\n1\nfoo\n";
        assert!(matches!(read(src), Err(IoError::Parse { line: 4, .. })));
    }

    #[test]
    fn bad_header_and_counts() {
        assert!(matches!(
            read("hello\n1 1\n1\n"),
            Err(IoError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read("%%MatrixMarket matrix array complex general\n1 1\n1\n"),
            Err(IoError::Parse { line: 1, .. })
        ));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n";
        assert!(matches!(read(short), Err(IoError::Shape(_))));
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert!(matches!(read(oob), Err(IoError::Parse { line: 3, .. })));
    }

    #[test]
    fn writer_output_reads_back() {
        let m = DenseMatrix::from_rows(&[&[0.1, -2.5e-17, 3.0], &[1e300, 0.0, -7.25]]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), m);
    }
}
