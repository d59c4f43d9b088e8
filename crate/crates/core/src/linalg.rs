//! Small dense row-major matrices and the one-sided Jacobi SVD used for the
//! orthogonality projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a vector that stacks its columns.
    pub fn from_col_major(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = data[j * rows + i];
            }
        }
        Ok(m)
    }

    /// Stacks the columns into one vector.
    pub fn to_col_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale_in_place(&mut self, factor: T) {
        for v in &mut self.data {
            *v = *v * factor;
        }
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::cast(v.as_f64())).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `M = U diag(s) Vᵀ` of a `d × r` matrix with `d ≥ r`.
#[derive(Clone, Debug)]
pub struct ThinSvd<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns whose singular value is numerically zero get an orthonormal
/// completion of `U`, so `U` always has orthonormal columns.
pub fn thin_svd<T: Scalar>(m: &Matrix<T>) -> Result<ThinSvd<T>> {
    let (d, r) = (m.rows(), m.cols());
    if r == 0 || d < r {
        return Err(Error::Shape(format!("thin SVD needs rows >= cols >= 1, got {d}x{r}")));
    }
    // Work column-major: a[j] is column j.
    let mut a: Vec<Vec<T>> = (0..r).map(|j| (0..d).map(|i| m[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<T>> = (0..r)
        .map(|j| (0..r).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..r {
            for q in p + 1..r {
                let alpha: T = a[p].iter().map(|&x| x * x).sum();
                let beta: T = a[q].iter().map(|&x| x * x).sum();
                let gamma: T = a[p].iter().zip(&a[q]).map(|(&x, &y)| x * y).sum();
                if gamma.is_zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::cast(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = a.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let singular_values: Vec<T> = a
        .iter()
        .map(|col| col.iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    let s_max = singular_values.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let cutoff = s_max * eps * T::cast(d as f64);

    let mut u_cols: Vec<Option<Vec<T>>> = a
        .into_iter()
        .zip(&singular_values)
        .map(|(col, &s)| {
            if s > cutoff && s > T::min_positive_value() {
                Some(col.into_iter().map(|x| x / s).collect())
            } else {
                None
            }
        })
        .collect();
    complete_orthonormal(&mut u_cols, d);

    let mut u = Matrix::zeros(d, r);
    for (j, col) in u_cols.into_iter().enumerate() {
        let col = col.expect("completed column");
        for i in 0..d {
            u[(i, j)] = col[i];
        }
    }
    let mut vm = Matrix::zeros(r, r);
    for (j, col) in v.iter().enumerate() {
        for i in 0..r {
            vm[(i, j)] = col[i];
        }
    }
    Ok(ThinSvd {
        u,
        singular_values,
        v: vm,
    })
}

fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Fills the missing columns with unit vectors orthogonal to all others,
/// drawing candidates from the standard basis (two Gram-Schmidt passes).
fn complete_orthonormal<T: Scalar>(cols: &mut [Option<Vec<T>>], d: usize) {
    let mut basis = 0usize;
    for j in 0..cols.len() {
        if cols[j].is_some() {
            continue;
        }
        while basis < d {
            let mut cand = vec![T::zero(); d];
            cand[basis] = T::one();
            basis += 1;
            for _ in 0..2 {
                for other in cols.iter().flatten() {
                    let proj: T = other.iter().zip(&cand).map(|(&o, &c)| o * c).sum();
                    for (c, &o) in cand.iter_mut().zip(other) {
                        *c = *c - proj * o;
                    }
                }
            }
            let norm = cand.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm > T::cast(0.5) {
                cols[j] = Some(cand.into_iter().map(|x| x / norm).collect());
                break;
            }
        }
    }
}

/// Orthonormal polar factor `U Vᵀ` of `m` (the nearest matrix with
/// orthonormal columns in Frobenius norm).
pub fn polar_factor<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let svd = thin_svd(m)?;
    svd.u.matmul(&svd.v.transpose())
}
