//! LIBSVM text format: `label idx:val idx:val ...` per line, 1-based
//! strictly ascending feature indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Result, TmapError};
use crate::problems::SparseRowMatrix;

/// How labels are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Classification labels: `+1`/`1` map to `+1`, `-1`/`0` map to `-1`.
    Binary,
    /// Regression targets, kept as read.
    Real,
}

/// Reads a LIBSVM file with binary labels.
pub fn parse_libsvm<P: AsRef<Path>>(path: P) -> Result<(SparseRowMatrix, Vec<f64>)> {
    read_libsvm(BufReader::new(File::open(path)?), LabelMode::Binary, None)
}

/// Reads LIBSVM data. The column count is the largest index seen unless
/// `n_features` is given, which must then cover every index.
pub fn read_libsvm<R: BufRead>(
    reader: R,
    mode: LabelMode,
    n_features: Option<usize>,
) -> Result<(SparseRowMatrix, Vec<f64>)> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| TmapError::Parse {
            line: lineno,
            message,
        };
        let mut tokens = content.split_ascii_whitespace();
        let label_tok = tokens.next().expect("non-empty line");
        let raw: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("invalid label '{label_tok}'")))?;
        let label = match mode {
            LabelMode::Real if raw.is_finite() => raw,
            LabelMode::Binary if raw == 1.0 => 1.0,
            LabelMode::Binary if raw == -1.0 || raw == 0.0 => -1.0,
            _ => return Err(err(format!("label '{label_tok}' cannot be used"))),
        };
        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("malformed feature '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("invalid index in '{tok}'")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("invalid value in '{tok}'")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(err(format!("index {idx} not ascending after {prev}")));
            }
            if !val.is_finite() {
                return Err(err(format!("non-finite value in '{tok}'")));
            }
            prev = idx;
            row.push((idx - 1, val));
        }
        max_index = max_index.max(prev);
        rows.push(row);
        labels.push(label);
    }
    let cols = match n_features {
        Some(n) if n < max_index => {
            return Err(TmapError::Data(format!(
                "feature index {max_index} exceeds declared dimension {n}"
            )))
        }
        Some(n) => n,
        None => max_index,
    };
    Ok((SparseRowMatrix::from_rows(cols, rows)?, labels))
}

pub fn write_libsvm<W: Write>(matrix: &SparseRowMatrix, labels: &[f64], mut w: W) -> Result<()> {
    if labels.len() != matrix.nrows() {
        return Err(TmapError::Dimension {
            expected: matrix.nrows(),
            found: labels.len(),
        });
    }
    for (i, label) in labels.iter().enumerate() {
        write!(w, "{label:?}")?;
        let (idx, val) = matrix.row(i);
        for (j, v) in idx.iter().zip(val) {
            write!(w, " {}:{v:?}", j + 1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
