//! Finite-sum problems `F(x) = (1/N) Σ f_i(x) + h(x)` and the benchmark instances.

mod dataset;
mod eigenvalue;
mod gradcheck;
mod libsvm;
mod phase_retrieval;

pub use dataset::{read_dataset, write_dataset, DatasetMatrix, Provenance, DATASET_MAGIC};
pub use eigenvalue::EigenvalueProblem;
pub use gradcheck::gradient_check;
pub use libsvm::{parse_libsvm, read_libsvm, LibsvmOptions};
pub use phase_retrieval::{PhaseRetrievalOptions, PhaseRetrievalProblem};

use std::sync::Once;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::prox::{ProxOperator, RegValue};
use crate::rng::{stream, SeedDomain};
use crate::scalar::Scalar;
use crate::vector::DenseVector;

/// `f = (1/N) Σ_i f_i` plus the regularizer `h`.
///
/// Implementors provide the per-component gradient in accumulating form; the
/// full and minibatch gradients are built from it with a fixed summation order.
pub trait FiniteSumProblem<T: Scalar>: Send + Sync {
    fn dimension(&self) -> usize;

    fn num_components(&self) -> usize;

    /// `out += weight * ∇f_i(x)`. `x` and `out` have length [`dimension`](Self::dimension).
    fn accumulate_component_gradient(&self, i: usize, x: &[T], weight: T, out: &mut [T]);

    /// The smooth part `f(x)`.
    fn smooth_value(&self, x: &[T]) -> T;

    fn regularizer(&self) -> &ProxOperator<T>;

    /// Short human-readable description, e.g. `phase_retrieval(N=500,n=100)`.
    fn descriptor(&self) -> String;

    /// Hex digest identifying the problem data.
    fn content_hash(&self) -> String;

    fn component_gradient(&self, i: usize, x: &DenseVector<T>) -> Result<DenseVector<T>> {
        self.check_point(x)?;
        if i >= self.num_components() {
            return Err(Error::Domain(format!(
                "component index {i} out of range 0..{}",
                self.num_components()
            )));
        }
        let mut out = vec![T::zero(); self.dimension()];
        self.accumulate_component_gradient(i, x.as_slice(), T::one(), &mut out);
        DenseVector::new(out)
    }

    fn full_gradient(&self, x: &DenseVector<T>) -> Result<DenseVector<T>> {
        self.check_point(x)?;
        let n = self.num_components();
        let weight = T::one() / T::cast(n as f64);
        let mut out = vec![T::zero(); self.dimension()];
        for i in 0..n {
            self.accumulate_component_gradient(i, x.as_slice(), weight, &mut out);
        }
        DenseVector::new(out)
    }

    fn objective_smooth(&self, x: &DenseVector<T>) -> Result<T> {
        self.check_point(x)?;
        let v = self.smooth_value(x.as_slice());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { index: 0 })
        }
    }

    /// `F(x) = f(x) + h(x)`.
    fn objective(&self, x: &DenseVector<T>) -> Result<RegValue<T>> {
        let f = self.objective_smooth(x)?;
        Ok(match self.regularizer().evaluate(x) {
            RegValue::Finite(h) => RegValue::Finite(f + h),
            RegValue::Infeasible => RegValue::Infeasible,
        })
    }

    fn check_point(&self, x: &DenseVector<T>) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

static UNBOUNDED_WARNING: Once = Once::new();

/// Logs a one-time warning when `h` does not bound the iterates.
pub fn warn_if_unbounded<T: Scalar>(h: &ProxOperator<T>) {
    if !h.is_bounding() {
        UNBOUNDED_WARNING.call_once(|| {
            log::warn!("regularizer does not bound the iterates; boundedness of the sequence is not guaranteed");
        });
    }
}

/// Standard-normal starting point drawn from the `Init` stream of `seed`.
///
/// Infeasible draws are projected by the optimizers before the first step.
pub fn random_start<T: Scalar>(dimension: usize, seed: u64) -> DenseVector<T> {
    let mut rng = stream(seed, SeedDomain::Init);
    let values = (0..dimension)
        .map(|_| T::cast(StandardNormal.sample(&mut rng)))
        .collect();
    DenseVector::new(values).expect("normal draws are finite")
}
