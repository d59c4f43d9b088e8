//! Reader for the sparse `label idx:val idx:val ...` text format (1-based
//! indices). Labels are discarded; only the feature matrix is kept.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream, SeedDomain};
use crate::scalar::Scalar;

use super::dataset::{DatasetMatrix, Provenance};

/// Subsampling request applied after parsing.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LibsvmOptions {
    /// Number of examples to keep; all when `None`.
    pub rows: Option<usize>,
    /// Number of feature columns to keep; all when `None`.
    pub cols: Option<usize>,
    /// Declared feature count; defaults to the largest index seen.
    pub num_features: Option<usize>,
    pub seed: u64,
}

/// Parses the text into a dense matrix (no normalization).
pub fn parse_libsvm<T: Scalar, R: BufRead>(reader: R, num_features: Option<usize>) -> Result<Matrix<T>> {
    let mut rows: Vec<Vec<(usize, T)>> = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().unwrap_or("");
        if label.parse::<f64>().is_err() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("invalid label `{label}`"),
            });
        }
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected `index:value`, got `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid index `{idx}`"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "feature indices start at 1".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid value `{val}`"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite value `{val}`"),
                });
            }
            if let Some(n) = num_features {
                if idx > n {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("index {idx} exceeds declared feature count {n}"),
                    });
                }
            }
            max_index = max_index.max(idx);
            entries.push((idx - 1, T::cast(val)));
        }
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let cols = num_features.unwrap_or(max_index);
    if cols == 0 {
        return Err(Error::EmptyInput);
    }
    let mut m = Matrix::zeros(rows.len(), cols);
    for (i, entries) in rows.into_iter().enumerate() {
        for (j, v) in entries {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Parses, subsamples rows and columns with the seeded generator, then
/// normalizes to unit Frobenius norm.
pub fn read_libsvm<T: Scalar>(path: &Path, opts: &LibsvmOptions) -> Result<DatasetMatrix<T>> {
    let file = std::fs::File::open(path)?;
    let full: Matrix<T> = parse_libsvm(BufReader::new(file), opts.num_features)?;
    let mut rng = stream(opts.seed, SeedDomain::Subsample);
    let pick = |available: usize, wanted: Option<usize>, what: &str, rng: &mut _| -> Result<Vec<usize>> {
        match wanted {
            None => Ok((0..available).collect()),
            Some(k) if k == 0 || k > available => {
                Err(Error::Shape(format!("requested {k} {what}, file has {available}")))
            }
            Some(k) => {
                let mut idx = sample(rng, available, k).into_vec();
                idx.sort_unstable();
                Ok(idx)
            }
        }
    };
    let row_idx = pick(full.rows(), opts.rows, "rows", &mut rng)?;
    let col_idx = pick(full.cols(), opts.cols, "columns", &mut rng)?;
    let mut m = Matrix::zeros(row_idx.len(), col_idx.len());
    for (i, &r) in row_idx.iter().enumerate() {
        for (j, &c) in col_idx.iter().enumerate() {
            m[(i, j)] = full[(r, c)];
        }
    }
    DatasetMatrix::normalized(
        m,
        Provenance::File {
            path: path.display().to_string(),
            seed: opts.seed,
        },
    )
}
