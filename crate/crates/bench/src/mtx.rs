//! Matrix Market coordinate files.
//!
//! Supported headers are `%%MatrixMarket matrix coordinate F S` with field
//! `F` in {real, integer, pattern} and symmetry `S` in {general, symmetric}.
//! Indices in the file are 1-based. Symmetric files are expanded to both
//! triangles with diagonal entries kept once; pattern entries get value 1.0.
//! Explicitly stored zeros are kept as entries.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use csr5::{coo_to_csr, CooEntry, CsrMatrix};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMarket {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<CooEntry>,
}

impl MatrixMarket {
    pub fn to_csr(&self) -> Result<CsrMatrix> {
        Ok(coo_to_csr(&self.entries, self.rows, self.cols)?)
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MatrixMarket> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    parse_matrix_market(BufReader::new(file)).map_err(|e| match e {
        BenchError::Io { source, .. } => BenchError::io(path, source),
        other => other,
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> BenchError {
    BenchError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<(Field, bool)> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "missing %%MatrixMarket header"));
    }
    if tokens.len() != 5 {
        return Err(parse_err(
            1,
            "header must have object, format, field and symmetry",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(BenchError::Unsupported(format!("object {}", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(BenchError::Unsupported(format!("format {}", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(BenchError::Unsupported(format!("field {other}"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(BenchError::Unsupported(format!("symmetry {other}"))),
    };
    Ok((field, symmetric))
}

fn parse_index(tok: Option<&str>, bound: usize, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what} index")))?;
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what} index {tok:?}")))?;
    if v == 0 || v > bound {
        return Err(parse_err(
            line,
            format!("{what} index {v} outside 1..={bound}"),
        ));
    }
    Ok(v - 1)
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<MatrixMarket> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header.map_err(|e| BenchError::io("<input>", e))?;
    let (field, symmetric) = parse_header(&header)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let line = line.map_err(|e| BenchError::io("<input>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let Some((rows, cols, nnz)) = size else {
            let mut dim = |what: &str| -> Result<usize> {
                toks.next()
                    .ok_or_else(|| parse_err(lineno, format!("size line is missing {what}")))?
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad {what} in size line")))
            };
            let s = (dim("rows")?, dim("cols")?, dim("nnz")?);
            if toks.next().is_some() {
                return Err(parse_err(lineno, "size line has extra fields"));
            }
            entries.reserve(if symmetric { 2 * s.2 } else { s.2 });
            size = Some(s);
            continue;
        };
        if seen == nnz {
            return Err(parse_err(lineno, format!("more than {nnz} entries")));
        }
        let row = parse_index(toks.next(), rows, lineno, "row")?;
        let col = parse_index(toks.next(), cols, lineno, "column")?;
        let value = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let tok = toks
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing value"))?;
                match field {
                    Field::Integer => tok
                        .parse::<i64>()
                        .map_err(|_| parse_err(lineno, format!("bad integer value {tok:?}")))?
                        as f64,
                    _ => tok
                        .parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("bad real value {tok:?}")))?,
                }
            }
        };
        if toks.next().is_some() {
            return Err(parse_err(lineno, "trailing fields after entry"));
        }
        entries.push(CooEntry::new(row, col, value));
        if symmetric && row != col {
            entries.push(CooEntry::new(col, row, value));
        }
        seen += 1;
    }

    let Some((rows, cols, nnz)) = size else {
        return Err(parse_err(1, "missing size line"));
    };
    if seen != nnz {
        return Err(parse_err(
            0,
            format!("expected {nnz} entries, found {seen}"),
        ));
    }
    Ok(MatrixMarket {
        rows,
        cols,
        entries,
    })
}
