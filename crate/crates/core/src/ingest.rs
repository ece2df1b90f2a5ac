//! Reading point sets from CSV and Matrix Market files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, PointMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Mm,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "mm" | "mtx" | "matrix_market" => Ok(InputFormat::Mm),
            _ => Err(Error::Parameter(format!("unknown input format {s:?}"))),
        }
    }
}

impl InputFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx" | "mm") => InputFormat::Mm,
            _ => InputFormat::Csv,
        }
    }
}

pub fn ingest(path: &Path, format: InputFormat) -> Result<PointMatrix> {
    let file = File::open(path).map_err(Error::at(path))?;
    match format {
        InputFormat::Csv => read_csv(file),
        InputFormat::Mm => read_matrix_market(BufReader::new(file)),
    }
}

/// Numeric CSV, one point per line. A first line with no numeric cells is
/// taken as a header and skipped.
pub fn read_csv<R: Read>(reader: R) -> Result<PointMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = rec.position().map_or(r + 1, |p| p.line() as usize);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if r == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Parse { line, msg: format!("expected {w} columns, found {}", rec.len()) })
            }
            _ => {}
        }
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Parse { line, msg: format!("non-numeric cell {cell:?} in column {}", col + 1) })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, msg: format!("non-finite value in column {}", col + 1) });
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    if rows == 0 {
        return Err(Error::Parse { line: 1, msg: "no data rows".into() });
    }
    Ok(PointMatrix::Dense(DMatrix::from_row_slice(rows, cols, &values)))
}

pub fn write_csv<W: Write>(points: &PointMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for i in 0..points.nrows() {
        let row = points.row(i);
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Matrix Market `coordinate` (stored sparse) or `array` (stored dense)
/// files with `real` or `integer` fields and `general` symmetry.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<PointMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
    };
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse { line: hline, msg: "missing %%MatrixMarket matrix header".into() });
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse { line: hline, msg: format!("unsupported layout {other}") }),
    };
    if !matches!(tokens[3].as_str(), "real" | "integer") {
        return Err(Error::Parse { line: hline, msg: format!("unsupported field {}", tokens[3]) });
    }
    if tokens[4] != "general" {
        return Err(Error::Parse { line: hline, msg: format!("unsupported symmetry {}", tokens[4]) });
    }
    let mut body = lines.filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((n, other)),
    });
    let parse_nums = |n: usize, l: &str| -> Result<Vec<f64>> {
        l.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse { line: n, msg: format!("bad number {t:?}") }))
            .collect()
    };
    let (sline, size) = match body.next() {
        Some((n, l)) => (n, parse_nums(n, &l?)?),
        None => return Err(Error::Parse { line: hline + 1, msg: "missing size line".into() }),
    };
    let want = if coordinate { 3 } else { 2 };
    if size.len() != want || size.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
        return Err(Error::Parse { line: sline, msg: "malformed size line".into() });
    }
    let (nrows, ncols) = (size[0] as usize, size[1] as usize);
    let expected = if coordinate { size[2] as usize } else { nrows * ncols };
    let mut entries = Vec::with_capacity(expected);
    let mut last = sline;
    for (n, l) in body {
        let vals = parse_nums(n, &l?)?;
        last = n;
        if coordinate {
            if vals.len() != 3 {
                return Err(Error::Parse { line: n, msg: "expected `row col value`".into() });
            }
            let (i, j) = (vals[0], vals[1]);
            if i < 1.0 || j < 1.0 || i > nrows as f64 || j > ncols as f64 || i.fract() != 0.0 || j.fract() != 0.0 {
                return Err(Error::Parse { line: n, msg: format!("index ({i}, {j}) outside {nrows}x{ncols}") });
            }
            entries.push((i as usize - 1, j as usize - 1, vals[2]));
        } else {
            if vals.len() != 1 {
                return Err(Error::Parse { line: n, msg: "expected one value per line".into() });
            }
            entries.push((0, 0, vals[0]));
        }
    }
    if entries.len() != expected {
        return Err(Error::Parse { line: last, msg: format!("expected {expected} entries, found {}", entries.len()) });
    }
    if coordinate {
        Ok(PointMatrix::Sparse(CsrMatrix::from_triplets(nrows, ncols, &entries)?))
    } else {
        Ok(PointMatrix::Dense(DMatrix::from_iterator(nrows, ncols, entries.into_iter().map(|e| e.2))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_csv() {
        let a = read_csv("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(a.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn header_is_skipped() {
        let a = read_csv("x,y\n1,2\n".as_bytes()).unwrap();
        assert_eq!(a.nrows(), 1);
    }

    #[test]
    fn ragged_csv_names_line() {
        match read_csv("1,2\n3,4\n5\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        match read_csv("1,2\n3,oops\n".as_bytes()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn coordinate_matrix_market() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n3 4 3\n1 1 2.5\n2 4 -1\n3 2 7\n";
        let a = read_matrix_market(text.as_bytes()).unwrap();
        assert!(a.is_sparse());
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.to_dense()[(1, 3)], -1.0);
    }

    #[test]
    fn matrix_market_errors_carry_lines() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n";
        match read_matrix_market(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(read_matrix_market("garbage\n".as_bytes()).is_err());
    }
}
