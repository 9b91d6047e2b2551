//! Matrix Market coordinate files (`real`, `general` or `symmetric`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        msg: msg.into(),
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

pub fn parse_matrix_market(reader: impl BufRead) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let banner = banner?;
    let fields: Vec<String> = banner
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(err(1, format!("bad banner `{banner}`")));
    }
    if fields[2] != "coordinate" {
        return Err(err(1, format!("unsupported format `{}`", fields[2])));
    }
    if fields[3] != "real" {
        return Err(err(1, format!("unsupported field `{}`", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 1;
    for (lineno, line) in lines {
        let line = line?;
        last_line = lineno;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(err(lineno, "size line needs rows, columns and entry count"));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(lineno, format!("bad integer `{s}`")))
                };
                size = Some((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
            }
            Some((m, n, nnz)) => {
                if parts.len() != 3 {
                    return Err(err(lineno, "entry needs row, column and value"));
                }
                if seen == nnz {
                    return Err(err(lineno, format!("more than the declared {nnz} entries")));
                }
                let i: usize = parts[0]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad row index `{}`", parts[0])))?;
                let j: usize = parts[1]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad column index `{}`", parts[1])))?;
                let v: f64 = parts[2]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad value `{}`", parts[2])))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(err(
                        lineno,
                        format!("index ({i}, {j}) out of range for {m}x{n}"),
                    ));
                }
                if symmetric && j > i {
                    return Err(err(lineno, "symmetric file stores an upper-triangle entry"));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
                seen += 1;
            }
        }
    }
    let (m, n, nnz) = size.ok_or_else(|| err(last_line, "missing size line"))?;
    if seen != nnz {
        return Err(err(
            last_line,
            format!("declared {nnz} entries but found {seen}"),
        ));
    }
    if symmetric && m != n {
        return Err(err(1, "symmetric matrix must be square"));
    }
    CsrMatrix::from_triplets(m, n, &triplets)
}

/// Writes in `general` form with 17 significant digits per value.
pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_matrix_market(a, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn format_matrix_market(a: &CsrMatrix, w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CsrMatrix> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn identity_round_trip() {
        let mut buf = Vec::new();
        format_matrix_market(&CsrMatrix::identity(3), &mut buf).unwrap();
        assert_eq!(parse_matrix_market(&buf[..]).unwrap(), CsrMatrix::identity(3));
    }

    #[test]
    fn out_of_range_names_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n3 3 1\n4 5 1.0\n";
        match parse(text) {
            Err(Error::MatrixMarket { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetric_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 2\n1 1 2.0\n3 1 -1.5\n";
        let a = parse(text).unwrap();
        assert_eq!(a.get(2, 0), Some(-1.5));
        assert_eq!(a.get(0, 2), Some(-1.5));
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn count_mismatch() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n";
        assert!(matches!(parse(text), Err(Error::MatrixMarket { line: 3, .. })));
    }

    #[test]
    fn bad_banner() {
        assert!(matches!(
            parse("%%MatrixMarket matrix array real general\n1 1\n1.0\n"),
            Err(Error::MatrixMarket { line: 1, .. })
        ));
    }
}
