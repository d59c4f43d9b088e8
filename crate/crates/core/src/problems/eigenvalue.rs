use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::prox::ProxOperator;
use crate::scalar::Scalar;

use super::dataset::DatasetMatrix;
use super::FiniteSumProblem;

/// `min tr(VᵀCV) + tr(C)` subject to `VᵀV = I` with `V ∈ R^{d×rank}`.
///
/// The variable is the column-stacked `V`. Exposed as a single-component
/// finite sum, so every gradient is exact.
#[derive(Clone, Debug)]
pub struct EigenvalueProblem<T> {
    c: Matrix<T>,
    rank: usize,
    trace_c: T,
    regularizer: ProxOperator<T>,
}

impl<T: Scalar> EigenvalueProblem<T> {
    /// Builds `C = −DᵀD` from the data matrix.
    pub fn from_dataset(data: &DatasetMatrix<T>, rank: usize) -> Result<Self> {
        let d = data.matrix();
        if rank == 0 || rank > d.cols() {
            return Err(Error::Shape(format!("rank {rank} must lie in 1..={}", d.cols())));
        }
        let mut c = d.transpose().matmul(d)?;
        c.scale_in_place(-T::one());
        Self::new(c, rank)
    }

    /// Uses a given symmetric matrix `C`.
    pub fn new(c: Matrix<T>, rank: usize) -> Result<Self> {
        let d = c.rows();
        if c.cols() != d {
            return Err(Error::Shape(format!("C must be square, got {d}x{}", c.cols())));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (c[(i, j)], c[(j, i)]);
                if (a - b).abs() > T::epsilon() * T::cast(16.0) * (a.abs() + b.abs()) {
                    return Err(Error::Domain("C must be symmetric".into()));
                }
            }
        }
        let regularizer =
            ProxOperator::stiefel(d, rank).map_err(|_| Error::Shape(format!("rank {rank} must lie in 1..={d}")))?;
        Ok(Self {
            trace_c: c.trace(),
            c,
            rank,
            regularizer,
        })
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.c.rows()
    }

    /// `C v` for one column `v`.
    fn apply(&self, v: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.c.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }
}

impl<T: Scalar> FiniteSumProblem<T> for EigenvalueProblem<T> {
    fn dimension(&self) -> usize {
        self.order() * self.rank
    }

    fn num_components(&self) -> usize {
        1
    }

    fn accumulate_component_gradient(&self, _i: usize, x: &[T], weight: T, out: &mut [T]) {
        let d = self.order();
        let mut cv = vec![T::zero(); d];
        let two = T::cast(2.0) * weight;
        for k in 0..self.rank {
            self.apply(&x[k * d..(k + 1) * d], &mut cv);
            for (o, &g) in out[k * d..(k + 1) * d].iter_mut().zip(&cv) {
                *o = *o + two * g;
            }
        }
    }

    fn smooth_value(&self, x: &[T]) -> T {
        let d = self.order();
        let mut cv = vec![T::zero(); d];
        let mut total = T::zero();
        for k in 0..self.rank {
            let col = &x[k * d..(k + 1) * d];
            self.apply(col, &mut cv);
            total = total + col.iter().zip(&cv).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
        total + self.trace_c
    }

    fn regularizer(&self) -> &ProxOperator<T> {
        &self.regularizer
    }

    fn descriptor(&self) -> String {
        format!("eigenvalue(d={},rank={})", self.order(), self.rank)
    }

    fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.descriptor().as_bytes());
        for v in self.c.as_slice() {
            hasher.update(v.as_f64().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Provenance;
    use crate::vector::DenseVector;

    #[test]
    fn identity_data_gives_half_identity() {
        let d = DatasetMatrix::normalized(Matrix::<f64>::identity(2), Provenance::Synthetic { seed: 0 }).unwrap();
        let p = EigenvalueProblem::from_dataset(&d, 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { -0.5 } else { 0.0 };
                assert!((p.c()[(i, j)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradient_is_twice_cv() {
        let c = Matrix::from_row_major(2, 2, vec![-2.0, 1.0, 1.0, -3.0]).unwrap();
        let p = EigenvalueProblem::new(c, 1).unwrap();
        let x = DenseVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(p.full_gradient(&x).unwrap().as_slice(), &[-4.0, 2.0]);
        // tr(VᵀCV) + tr(C) = -2 + -5
        assert_eq!(p.objective_smooth(&x).unwrap(), -7.0);
    }

    #[test]
    fn shape_errors() {
        let d = DatasetMatrix::<f64>::synthetic(5, 3, 1).unwrap();
        assert!(matches!(EigenvalueProblem::from_dataset(&d, 4), Err(Error::Shape(_))));
        assert!(EigenvalueProblem::from_dataset(&d, 0).is_err());
        let asym = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(EigenvalueProblem::new(asym, 1).is_err());
    }
}
