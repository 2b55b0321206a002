//! Matrix Market coordinate I/O.
//!
//! Only `matrix coordinate real {general|symmetric}` is accepted. Symmetric
//! files are expanded to general storage on read, duplicates are summed and
//! indices are converted to 0-based. Values are written in shortest
//! round-trip exponent form so a write/read cycle is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{CooMatrix, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_banner(line: &str) -> Result<Symmetry> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(1, "malformed Matrix Market banner"));
    }
    if tokens[1] != "matrix" {
        return Err(Error::UnsupportedFormat(tokens[1].clone()));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::UnsupportedFormat(tokens[2].clone()));
    }
    if tokens[3] != "real" {
        return Err(Error::UnsupportedFormat(tokens[3].clone()));
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(Error::UnsupportedFormat(other.to_string())),
    }
}

/// Reads a Matrix Market stream into canonical COO.
pub fn read_from<R: BufRead>(reader: R) -> Result<CooMatrix> {
    let mut lines = reader.lines().enumerate();
    let banner = match lines.next() {
        Some((_, Ok(l))) => l,
        Some((_, Err(e))) => return Err(parse_err(1, e.to_string())),
        None => return Err(parse_err(1, "empty file")),
    };
    let symmetry = parse_banner(&banner)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut coo = CooMatrix::new(0, 0);
    let mut seen = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "expected size line `rows cols nnz`"));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(lineno, format!("invalid size field `{s}`")))
                };
                let (r, c, nz) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if symmetry == Symmetry::Symmetric && r != c {
                    return Err(parse_err(lineno, "symmetric matrix must be square"));
                }
                size = Some((r, c, nz));
                let cap = if symmetry == Symmetry::Symmetric {
                    2 * nz
                } else {
                    nz
                };
                coo = CooMatrix::with_capacity(r, c, cap);
            }
            Some((nrows, ncols, nnz)) => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "expected entry `row col value`"));
                }
                if seen == nnz {
                    return Err(parse_err(lineno, "more entries than declared"));
                }
                let row: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("invalid row index `{}`", fields[0])))?;
                let col: usize = fields[1].parse().map_err(|_| {
                    parse_err(lineno, format!("invalid column index `{}`", fields[1]))
                })?;
                let value: f64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("invalid value `{}`", fields[2])))?;
                if row == 0 || col == 0 || row > nrows || col > ncols {
                    return Err(Error::IndexOutOfRange {
                        line: lineno,
                        row,
                        col,
                        nrows,
                        ncols,
                    });
                }
                let (i, j) = (row - 1, col - 1);
                coo.push(i, j, value);
                if symmetry == Symmetry::Symmetric && i != j {
                    coo.push(j, i, value);
                }
                seen += 1;
            }
        }
    }
    match size {
        None => Err(parse_err(1, "missing size line")),
        Some((_, _, nnz)) if seen != nnz => Err(parse_err(
            0,
            format!("declared {nnz} entries but found {seen}"),
        )),
        Some(_) => {
            coo.canonicalize()?;
            Ok(coo)
        }
    }
}

/// Reads a Matrix Market file into canonical COO.
pub fn mm_read(path: impl AsRef<Path>) -> Result<CooMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_from(BufReader::new(file))
}

pub fn write_to<W: Write>(matrix: &CsrMatrix, mut w: W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", matrix.nrows, matrix.ncols, matrix.nnz())?;
    for i in 0..matrix.nrows {
        for (j, v) in matrix.row(i) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    w.flush()
}

/// Writes `matrix` as a general coordinate file.
pub fn mm_write(matrix: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_to(matrix, BufWriter::new(file)).map_err(io_err(path))
}

/// Writes a dense vector as an `n x 1` coordinate matrix with every entry stored.
pub fn write_vector(values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} 1 {}", values.len(), values.len())?;
        for (i, v) in values.iter().enumerate() {
            writeln!(w, "{} 1 {:e}", i + 1, v)?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}

/// Reads an `n x 1` coordinate file as a dense vector (absent entries are zero).
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let coo = mm_read(path)?;
    if coo.ncols != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: coo.ncols,
        });
    }
    let mut out = vec![0.0; coo.nrows];
    for (i, _, v) in coo.entries {
        out[i] = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_str(s: &str) -> Result<CooMatrix> {
        read_from(s.as_bytes())
    }

    #[test]
    fn read_general() {
        let coo = read_str(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 4\n1 1 4\n2 1 6\n1 2 3\n2 2 3\n",
        )
        .unwrap();
        assert_eq!(coo.nnz(), 4);
        assert_eq!(coo.get(0, 0), Some(4.0));
        assert_eq!(coo.get(1, 0), Some(6.0));
    }

    #[test]
    fn read_symmetric_expands() {
        let coo =
            read_str("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 1 1\n")
                .unwrap();
        assert_eq!(coo.entries, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0)]);
    }

    #[test]
    fn rejects_array_format() {
        let err =
            read_str("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap_err();
        assert_eq!(err.to_string(), "unsupported format: array");
    }

    #[test]
    fn rejects_pattern_and_complex() {
        for kind in ["pattern", "complex"] {
            let src = format!("%%MatrixMarket matrix coordinate {kind} general\n1 1 1\n1 1\n");
            assert!(matches!(
                read_str(&src),
                Err(Error::UnsupportedFormat(k)) if k == kind
            ));
        }
    }

    #[test]
    fn malformed_banner() {
        assert!(matches!(
            read_str("MatrixMarket matrix coordinate real general\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_range_reports_line() {
        let err = read_str("%%MatrixMarket matrix coordinate real general\n2 2 1\n% c\n3 1 1.0\n")
            .unwrap_err();
        assert!(matches!(
            err,
            Error::IndexOutOfRange {
                line: 4,
                row: 3,
                ..
            }
        ));
    }

    #[test]
    fn duplicates_summed_on_read() {
        let coo =
            read_str("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2\n")
                .unwrap();
        assert_eq!(coo.entries, vec![(0, 0, 3.5)]);
    }

    #[test]
    fn empty_matrix_roundtrip() {
        let a = CooMatrix::new(3, 3).to_csr().unwrap();
        let mut buf = Vec::new();
        write_to(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().any(|l| l == "3 3 0"));
        assert_eq!(read_from(&buf[..]).unwrap().to_csr().unwrap(), a);
    }

    #[test]
    fn tiny_value_roundtrip() {
        let a = CsrMatrix::from_dense(&[vec![1e-300, 0.0], vec![0.1 + 0.2, -4.0]]);
        let mut buf = Vec::new();
        write_to(&a, &mut buf).unwrap();
        assert_eq!(read_from(&buf[..]).unwrap().to_csr().unwrap(), a);
    }

    #[test]
    fn vector_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.mtx");
        let v = vec![0.0, 1.0 / 3.0, -2e-17];
        write_vector(&v, &path).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);
    }
}
