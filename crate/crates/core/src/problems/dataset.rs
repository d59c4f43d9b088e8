use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream, SeedDomain};
use crate::scalar::Scalar;

/// Leading bytes of the binary dataset container.
pub const DATASET_MAGIC: &[u8; 8] = b"AEPGDAT1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Synthetic { seed: u64 },
    File { path: String, seed: u64 },
}

/// A data matrix normalized to unit Frobenius norm.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetMatrix<T> {
    matrix: Matrix<T>,
    provenance: Provenance,
}

impl<T: Scalar> DatasetMatrix<T> {
    /// Divides `matrix` by its Frobenius norm.
    pub fn normalized(mut matrix: Matrix<T>, provenance: Provenance) -> Result<Self> {
        let norm = matrix.frobenius_norm();
        if !norm.is_finite() || norm <= T::zero() {
            return Err(Error::Domain(format!(
                "cannot normalize a matrix with Frobenius norm {norm}"
            )));
        }
        matrix.scale_in_place(T::one() / norm);
        Ok(Self { matrix, provenance })
    }

    /// `rows × cols` i.i.d. standard normal entries, then normalized.
    pub fn synthetic(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "dataset shape must be positive, got {rows}x{cols}"
            )));
        }
        let mut rng = stream(seed, SeedDomain::DataMatrix);
        let data = (0..rows * cols)
            .map(|_| T::cast(StandardNormal.sample(&mut rng)))
            .collect();
        Self::normalized(
            Matrix::from_row_major(rows, cols, data)?,
            Provenance::Synthetic { seed },
        )
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn frobenius_norm(&self) -> T {
        self.matrix.frobenius_norm()
    }
}

/// Writes the container: magic, little-endian `u64` rows and cols, then the
/// row-major `f64` payload.
pub fn write_dataset<T: Scalar, W: Write>(data: &DatasetMatrix<T>, mut out: W) -> Result<()> {
    out.write_all(DATASET_MAGIC)?;
    out.write_all(&(data.rows() as u64).to_le_bytes())?;
    out.write_all(&(data.cols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(data.matrix().as_slice().len() * 8);
    for v in data.matrix().as_slice() {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Reads a container written by [`write_dataset`]. The payload is taken as
/// already normalized; its norm is verified.
pub fn read_dataset<T: Scalar>(path: &Path, seed: u64) -> Result<DatasetMatrix<T>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 24 || &bytes[..8] != DATASET_MAGIC {
        return Err(Error::Format(format!("{}: missing AEPGDAT1 header", path.display())));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("shape overflow".into()))?;
    let payload = &bytes[24..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let data: Vec<T> = payload
        .chunks_exact(8)
        .map(|c| T::cast(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let matrix = Matrix::from_row_major(rows, cols, data)?;
    let norm = matrix.frobenius_norm().as_f64();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Format(format!("dataset is not normalized (norm {norm})")));
    }
    Ok(DatasetMatrix {
        matrix,
        provenance: Provenance::File {
            path: path.display().to_string(),
            seed,
        },
    })
}
