//! Matrix and vector text files.
//!
//! Plain format: a header line `m n` (vectors: `m`), then one row per line
//! with whitespace-separated decimal or scientific-notation entries. Vector
//! entries may be laid out on any number of lines. Blank lines and lines
//! starting with `#` are skipped.
//!
//! Files whose first line starts with `%%MatrixMarket` are read as Matrix
//! Market `matrix array real general` (column-major, one entry per line) or
//! `matrix coordinate real general` (1-based `i j value` triplets).

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::linalg::{DenseMatrix, RealVector};

/// Parse failures; line numbers are 1-based.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed header: {detail}")]
    MalformedHeader { line: usize, detail: String },
    #[error("line {line}: expected {expected} entries, found {found}")]
    EntryCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid number `{token}`")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: non-finite value `{token}`")]
    NonFinite { line: usize, token: String },
    #[error("line {line}: unsupported Matrix Market variant: {detail}")]
    Unsupported { line: usize, detail: String },
}

const MM_BANNER: &str = "%%MatrixMarket";

/// Data lines with their 1-based line numbers, comments and blanks removed.
fn content_lines<'a>(text: &'a str, comment: char) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(move |(_, l)| !l.is_empty() && !l.starts_with(comment))
}

fn parse_value(token: &str, line: usize) -> Result<f64, ParseError> {
    let v: f64 = token.parse().map_err(|_| ParseError::InvalidNumber {
        line,
        token: token.to_string(),
    })?;
    if !v.is_finite() {
        return Err(ParseError::NonFinite {
            line,
            token: token.to_string(),
        });
    }
    Ok(v)
}

fn parse_dims(line: &str, line_no: usize, count: usize) -> Result<Vec<usize>, ParseError> {
    let dims: Vec<usize> = line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| ParseError::MalformedHeader {
            line: line_no,
            detail: format!("expected {count} positive integers, got `{line}`"),
        })?;
    if dims.len() != count || dims.contains(&0) {
        return Err(ParseError::MalformedHeader {
            line: line_no,
            detail: format!("expected {count} positive integers, got `{line}`"),
        });
    }
    Ok(dims)
}

fn last_line(text: &str) -> usize {
    text.lines().count()
}

/// Parse a matrix from file contents.
pub fn parse_matrix_str(text: &str) -> Result<DenseMatrix, ParseError> {
    if text.trim_start().starts_with(MM_BANNER) {
        return parse_matrix_market(text);
    }
    let mut lines = content_lines(text, '#');
    let (hline, header) = lines.next().ok_or(ParseError::MalformedHeader {
        line: 1,
        detail: "empty input".into(),
    })?;
    let dims = parse_dims(header, hline, 2)?;
    let (m, n) = (dims[0], dims[1]);
    let mut data = Vec::with_capacity(m * n);
    let mut rows = 0;
    for (line, l) in lines {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if rows == m || tokens.len() != n {
            return Err(ParseError::EntryCountMismatch {
                line,
                expected: if rows == m { 0 } else { n },
                found: tokens.len(),
            });
        }
        for t in tokens {
            data.push(parse_value(t, line)?);
        }
        rows += 1;
    }
    if rows != m {
        return Err(ParseError::EntryCountMismatch {
            line: last_line(text) + 1,
            expected: m * n,
            found: data.len(),
        });
    }
    Ok(DenseMatrix::from_row_major(m, n, &data).expect("shape and finiteness checked"))
}

/// Parse a vector from file contents.
pub fn parse_vector_str(text: &str) -> Result<RealVector, ParseError> {
    if text.trim_start().starts_with(MM_BANNER) {
        let m = parse_matrix_market(text)?;
        if m.cols() != 1 {
            return Err(ParseError::MalformedHeader {
                line: 2,
                detail: format!("expected a single column, found {}", m.cols()),
            });
        }
        return Ok(m.column_vector(0));
    }
    let mut lines = content_lines(text, '#');
    let (hline, header) = lines.next().ok_or(ParseError::MalformedHeader {
        line: 1,
        detail: "empty input".into(),
    })?;
    let len = parse_dims(header, hline, 1)?[0];
    let mut data = Vec::with_capacity(len);
    for (line, l) in lines {
        for t in l.split_whitespace() {
            if data.len() == len {
                return Err(ParseError::EntryCountMismatch {
                    line,
                    expected: len,
                    found: len + 1,
                });
            }
            data.push(parse_value(t, line)?);
        }
    }
    if data.len() != len {
        return Err(ParseError::EntryCountMismatch {
            line: last_line(text) + 1,
            expected: len,
            found: data.len(),
        });
    }
    Ok(RealVector::new(data).expect("length and finiteness checked"))
}

fn parse_matrix_market(text: &str) -> Result<DenseMatrix, ParseError> {
    let banner = text.lines().next().unwrap_or_default();
    let fields: Vec<String> = banner
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() != 5 || fields[1] != "matrix" {
        return Err(ParseError::MalformedHeader {
            line: 1,
            detail: format!("bad banner `{banner}`"),
        });
    }
    if fields[3] != "real" || fields[4] != "general" {
        return Err(ParseError::Unsupported {
            line: 1,
            detail: format!("{} {}", fields[3], fields[4]),
        });
    }
    let mut lines = content_lines(text, '%');
    let (hline, header) = lines.next().ok_or(ParseError::MalformedHeader {
        line: 2,
        detail: "missing size line".into(),
    })?;
    match fields[2].as_str() {
        "array" => {
            let dims = parse_dims(header, hline, 2)?;
            let (m, n) = (dims[0], dims[1]);
            let mut data = Vec::with_capacity(m * n);
            for (line, l) in lines {
                for t in l.split_whitespace() {
                    if data.len() == m * n {
                        return Err(ParseError::EntryCountMismatch {
                            line,
                            expected: m * n,
                            found: m * n + 1,
                        });
                    }
                    data.push(parse_value(t, line)?);
                }
            }
            if data.len() != m * n {
                return Err(ParseError::EntryCountMismatch {
                    line: last_line(text) + 1,
                    expected: m * n,
                    found: data.len(),
                });
            }
            Ok(DenseMatrix::from_col_major(m, n, data).expect("shape and finiteness checked"))
        }
        "coordinate" => {
            let dims = parse_dims(header, hline, 3)?;
            let (m, n, nnz) = (dims[0], dims[1], dims[2]);
            let mut data = vec![0.0; m * n];
            let mut seen = 0;
            for (line, l) in lines {
                let tokens: Vec<&str> = l.split_whitespace().collect();
                if tokens.len() != 3 || seen == nnz {
                    return Err(ParseError::EntryCountMismatch {
                        line,
                        expected: 3,
                        found: tokens.len(),
                    });
                }
                let index = |t: &str, bound: usize| -> Result<usize, ParseError> {
                    match t.parse::<usize>() {
                        Ok(i) if (1..=bound).contains(&i) => Ok(i - 1),
                        _ => Err(ParseError::InvalidNumber {
                            line,
                            token: t.to_string(),
                        }),
                    }
                };
                let (i, j) = (index(tokens[0], m)?, index(tokens[1], n)?);
                data[j * m + i] = parse_value(tokens[2], line)?;
                seen += 1;
            }
            if seen != nnz {
                return Err(ParseError::EntryCountMismatch {
                    line: last_line(text) + 1,
                    expected: nnz,
                    found: seen,
                });
            }
            Ok(DenseMatrix::from_col_major(m, n, data).expect("shape and finiteness checked"))
        }
        other => Err(ParseError::Unsupported {
            line: 1,
            detail: other.to_string(),
        }),
    }
}

fn read(path: &Path) -> Result<String, ParseError> {
    fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_matrix_file(path: impl AsRef<Path>) -> Result<DenseMatrix, ParseError> {
    parse_matrix_str(&read(path.as_ref())?)
}

pub fn parse_vector_file(path: impl AsRef<Path>) -> Result<RealVector, ParseError> {
    parse_vector_str(&read(path.as_ref())?)
}

/// Plain-format text; `{:e}` keeps every value bit-exact on re-read.
pub fn format_matrix(a: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = (0..a.cols())
            .map(|j| format!("{:e}", a.get(i, j)))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_vector(v: &[f64]) -> String {
    let mut out = format!("{}\n", v.len());
    for x in v {
        out.push_str(&format!("{x:e}\n"));
    }
    out
}

/// Matrix Market `array real general` text.
pub fn format_matrix_market(a: &DenseMatrix) -> String {
    let mut out = format!(
        "{MM_BANNER} matrix array real general\n{} {}\n",
        a.rows(),
        a.cols()
    );
    for x in a.as_col_major() {
        out.push_str(&format!("{x:e}\n"));
    }
    out
}

pub fn write_matrix_file(a: &DenseMatrix, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, format_matrix(a))
}

pub fn write_vector_file(v: &[f64], path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, format_vector(v))
}
