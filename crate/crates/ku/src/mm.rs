//! Matrix Market reader and writer for dense complex matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ku_core::{DenseMatrix, C64};

#[derive(Debug, thiserror::Error)]
pub enum MmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported Matrix Market header: {0}")]
    Unsupported(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

impl Symmetry {
    fn mirror(self, z: C64) -> C64 {
        match self {
            Symmetry::General | Symmetry::Symmetric => z,
            Symmetry::Hermitian => z.conj(),
            Symmetry::Skew => -z,
        }
    }
}

fn parse_header(line: &str) -> Result<(Layout, Field, Symmetry), MmError> {
    let lower = line.to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(MmError::Unsupported(line.trim().to_string()));
    }
    let layout = match words[2] {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        _ => return Err(MmError::Unsupported(line.trim().to_string())),
    };
    let field = match words[3] {
        "real" | "double" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        _ => return Err(MmError::Unsupported(line.trim().to_string())),
    };
    let symmetry = match words[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        _ => return Err(MmError::Unsupported(line.trim().to_string())),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(MmError::Unsupported(line.trim().to_string()));
    }
    Ok((layout, field, symmetry))
}

fn parse_value(tokens: &[&str], field: Field, line: usize) -> Result<C64, MmError> {
    let num = |t: &str| -> Result<f64, MmError> {
        t.parse::<f64>()
            .map_err(|_| parse_err(line, format!("not a number: {t}")))
    };
    let want = match field {
        Field::Pattern => 0,
        Field::Real | Field::Integer => 1,
        Field::Complex => 2,
    };
    if tokens.len() != want {
        return Err(parse_err(
            line,
            format!("expected {want} value(s), found {}", tokens.len()),
        ));
    }
    Ok(match field {
        Field::Pattern => C64::new(1.0, 0.0),
        Field::Real | Field::Integer => C64::new(num(tokens[0])?, 0.0),
        Field::Complex => C64::new(num(tokens[0])?, num(tokens[1])?),
    })
}

/// Parses Matrix Market text into a dense matrix.
pub fn parse(text: &str) -> Result<DenseMatrix, MmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| MmError::Unsupported("empty input".into()))?;
    let (layout, field, symmetry) = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(size_line, "bad size line"))?;
    let expected_dims = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(parse_err(size_line, "bad size line"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(
            size_line,
            "symmetric storage needs a square matrix",
        ));
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    let mut place = |i: usize, j: usize, z: C64, line: usize| -> Result<(), MmError> {
        if i >= rows || j >= cols {
            return Err(parse_err(
                line,
                format!("index ({}, {}) out of range", i + 1, j + 1),
            ));
        }
        m[(i, j)] = z;
        if symmetry != Symmetry::General && i != j {
            m[(j, i)] = symmetry.mirror(z);
        }
        Ok(())
    };
    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (line, l) in body {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() < 2 {
                    return Err(parse_err(line, "missing indices"));
                }
                let idx = |s: &str| -> Result<usize, MmError> {
                    match s.parse::<usize>() {
                        Ok(k) if k >= 1 => Ok(k - 1),
                        _ => Err(parse_err(line, format!("bad index {s}"))),
                    }
                };
                let (i, j) = (idx(t[0])?, idx(t[1])?);
                let z = parse_value(&t[2..], field, line)?;
                place(i, j, z, line)?;
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(
                    size_line,
                    format!("declared {nnz} entries, found {seen}"),
                ));
            }
        }
        Layout::Array => {
            // column major; symmetric storage lists the lower triangle only
            let mut slots = Vec::new();
            for j in 0..cols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Skew => j + 1,
                    _ => j,
                };
                slots.extend((start..rows).map(|i| (i, j)));
            }
            let mut k = 0;
            for (line, l) in body {
                let t: Vec<&str> = l.split_whitespace().collect();
                let z = parse_value(&t, field, line)?;
                let &(i, j) = slots
                    .get(k)
                    .ok_or_else(|| parse_err(line, "more entries than the size line allows"))?;
                place(i, j, z, line)?;
                k += 1;
            }
            if k != slots.len() {
                return Err(parse_err(
                    size_line,
                    format!("expected {} entries, found {k}", slots.len()),
                ));
            }
        }
    }
    Ok(m)
}

pub fn read(path: &Path) -> Result<DenseMatrix, MmError> {
    let text = fs::read_to_string(path).map_err(|source| MmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// Dense `array general` text; `real` when every imaginary part is zero.
pub fn format(m: &DenseMatrix) -> String {
    let complex = m.as_slice().iter().any(|z| z.im != 0.0);
    let mut out = String::new();
    let field = if complex { "complex" } else { "real" };
    let _ = writeln!(out, "%%MatrixMarket matrix array {field} general");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for z in m.as_slice() {
        if complex {
            let _ = writeln!(out, "{:.17e} {:.17e}", z.re, z.im);
        } else {
            let _ = writeln!(out, "{:.17e}", z.re);
        }
    }
    out
}

pub fn write(path: &Path, m: &DenseMatrix) -> Result<(), MmError> {
    fs::write(path, format(m)).map_err(|source| MmError::Io {
        path: path.display().to_string(),
        source,
    })
}
