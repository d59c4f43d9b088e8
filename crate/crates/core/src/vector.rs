//! Dense vectors with elementwise arithmetic and the weighted geometry used by
//! the variable-metric proximal step.
//!
//! All operations are elementwise: `⊙` is [`ElementwiseOp::Mul`] and `÷` is
//! [`ElementwiseOp::Div`]. The weighted squared norm is `‖x‖_v² = Σ x_i² v_i`.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A dense vector whose entries are all finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector<T> {
    values: Vec<T>,
}

fn check_finite<T: Scalar>(values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl<T: Scalar> DenseVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
        }
    }

    pub fn filled(len: usize, value: T) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc })
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        check_len(self.len(), other.len())?;
        Ok(self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        elementwise(ElementwiseOp::Add, self, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        elementwise(ElementwiseOp::Sub, self, other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        elementwise(ElementwiseOp::Mul, self, other)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        elementwise(ElementwiseOp::Div, self, other)
    }

    pub fn scale(&self, factor: T) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| v * factor).collect())
    }

    /// Returns `self + factor * other`.
    pub fn add_scaled(&self, factor: T, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + factor * b)
                .collect(),
        )
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<DenseVector<U>> {
        DenseVector::new(self.values.iter().map(|&v| U::cast(v.as_f64())).collect())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

impl<T> Index<usize> for DenseVector<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        &self.values[index]
    }
}

impl<T> AsRef<[T]> for DenseVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementwiseOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` entry by entry. Division rejects zero divisors.
pub fn elementwise<T: Scalar>(op: ElementwiseOp, a: &DenseVector<T>, b: &DenseVector<T>) -> Result<DenseVector<T>> {
    check_len(a.len(), b.len())?;
    if op == ElementwiseOp::Div {
        if let Some(i) = b.values.iter().position(|v| v.is_zero()) {
            return Err(Error::Domain(format!("division by zero entry at index {i}")));
        }
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| match op {
            ElementwiseOp::Add => x + y,
            ElementwiseOp::Sub => x - y,
            ElementwiseOp::Mul => x * y,
            ElementwiseOp::Div => x / y,
        })
        .collect();
    DenseVector::new(values)
}

/// A strictly positive vector: the per-coordinate stepsize factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound = "T: Scalar")]
pub struct WeightVector<T> {
    values: DenseVector<T>,
}

impl<T: Scalar> TryFrom<Vec<T>> for WeightVector<T> {
    type Error = Error;

    fn try_from(values: Vec<T>) -> Result<Self> {
        Self::new(values)
    }
}

impl<T: Scalar> From<WeightVector<T>> for Vec<T> {
    fn from(w: WeightVector<T>) -> Self {
        w.values.into_vec()
    }
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        let values = DenseVector::new(values)?;
        if let Some(i) = values.iter().position(|&v| v <= T::zero()) {
            return Err(Error::Domain(format!("weight entry {i} is not strictly positive")));
        }
        Ok(Self { values })
    }

    pub fn uniform(len: usize, value: T) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        self.values.as_slice()
    }

    pub fn as_dense(&self) -> &DenseVector<T> {
        &self.values
    }

    pub fn min(&self) -> T {
        self.values
            .iter()
            .fold(T::infinity(), |acc, &v| if v < acc { v } else { acc })
    }

    pub fn max(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| if v > acc { v } else { acc })
    }

    /// True when `max - min <= rel_tol * max`.
    pub fn is_uniform(&self, rel_tol: T) -> bool {
        self.is_empty() || self.max() - self.min() <= rel_tol * self.max()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.to_f64_vec()
    }
}

/// `‖x‖_v² = Σ_i x_i² v_i`.
pub fn weighted_norm_sq<T: Scalar>(x: &DenseVector<T>, v: &WeightVector<T>) -> Result<T> {
    check_len(x.len(), v.len())?;
    Ok(x.iter().zip(v.as_slice()).map(|(&xi, &vi)| xi * xi * vi).sum())
}

/// `min_i a_i / b_i`.
pub fn min_ratio<T: Scalar>(a: &WeightVector<T>, b: &WeightVector<T>) -> Result<T> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::Domain("min_ratio of empty vectors".into()));
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&ai, &bi)| ai / bi)
        .fold(T::infinity(), |acc, r| if r < acc { r } else { acc }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DenseVector<f64> {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn wv(v: &[f64]) -> WeightVector<f64> {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn elementwise_examples() {
        let r = elementwise(ElementwiseOp::Mul, &dv(&[1.0, 2.0]), &dv(&[3.0, 4.0])).unwrap();
        assert_eq!(r.as_slice(), &[3.0, 8.0]);
        let r = elementwise(ElementwiseOp::Div, &dv(&[2.0, 6.0]), &dv(&[2.0, 3.0])).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 2.0]);
        let x = dv(&[1.5, -2.25, 7.0]);
        assert_eq!(x.add(&DenseVector::zeros(3)).unwrap(), x);
    }

    #[test]
    fn elementwise_errors() {
        let err = dv(&[1.0]).add(&dv(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, found: 2 }));
        let err = dv(&[1.0, 1.0]).div(&dv(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert!(matches!(
            DenseVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![-1.0]).is_err());
        // overflow inside an operation is caught as well
        assert!(dv(&[f64::MAX]).mul(&dv(&[2.0])).is_err());
    }

    #[test]
    fn weighted_norm_examples() {
        assert_eq!(weighted_norm_sq(&dv(&[1.0, 2.0]), &wv(&[1.0, 1.0])).unwrap(), 5.0);
        assert_eq!(weighted_norm_sq(&dv(&[1.0, 2.0]), &wv(&[3.0, 4.0])).unwrap(), 19.0);
        assert_eq!(weighted_norm_sq(&DenseVector::zeros(2), &wv(&[3.0, 4.0])).unwrap(), 0.0);
        assert!(weighted_norm_sq(&dv(&[1.0]), &wv(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn min_ratio_examples() {
        let a = wv(&[1.5, 2.5]);
        assert_eq!(min_ratio(&a, &a).unwrap(), 1.0);
        assert_eq!(min_ratio(&wv(&[1.0, 2.0]), &wv(&[2.0, 2.0])).unwrap(), 0.5);
        assert_eq!(min_ratio(&wv(&[3.0, 8.0]), &wv(&[1.0, 2.0])).unwrap(), 3.0);
        assert!(min_ratio(&wv(&[1.0]), &wv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let x = DenseVector::new(vec![1.0f32, 2.0]).unwrap();
        let v = WeightVector::new(vec![3.0f32, 4.0]).unwrap();
        assert_eq!(weighted_norm_sq(&x, &v).unwrap(), 19.0f32);
    }

    #[test]
    fn weight_vector_serde_validates() {
        let w: WeightVector<f64> = serde_json::from_str("[1.0, 2.0]").unwrap();
        assert_eq!(w.as_slice(), &[1.0, 2.0]);
        assert!(serde_json::from_str::<WeightVector<f64>>("[1.0, 0.0]").is_err());
    }

    proptest! {
        #[test]
        fn unit_weights_give_euclidean_norm(x in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let n = x.len();
            let x = DenseVector::new(x).unwrap();
            let got = weighted_norm_sq(&x, &WeightVector::uniform(n, 1.0).unwrap()).unwrap();
            prop_assert_eq!(got, x.norm_sq());
        }

        #[test]
        fn min_ratio_scales_below(pairs in prop::collection::vec((1e-3f64..1e3, 1e-3f64..1e3), 1..40)) {
            let a = WeightVector::new(pairs.iter().map(|p| p.0).collect()).unwrap();
            let b = WeightVector::new(pairs.iter().map(|p| p.1).collect()).unwrap();
            let m = min_ratio(&a, &b).unwrap();
            for (ai, bi) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!(m * bi <= *ai * (1.0 + 1e-15));
            }
        }
    }
}
