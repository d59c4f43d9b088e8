use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::prox::ProxOperator;
use crate::rng::{stream, SeedDomain};
use crate::scalar::Scalar;
use crate::vector::DenseVector;

use super::dataset::DatasetMatrix;
use super::FiniteSumProblem;

/// Sparse phase retrieval: `f_i(x) = (⟨x, a_i⟩² − y_i)²` with the capped-ℓ1
/// penalty and a box constraint.
#[derive(Clone, Debug)]
pub struct PhaseRetrievalProblem<T> {
    measurements: Matrix<T>,
    observations: Vec<T>,
    regularizer: ProxOperator<T>,
    ground_truth: Option<DenseVector<T>>,
}

/// Synthesis parameters for [`PhaseRetrievalProblem::generate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseRetrievalOptions {
    /// Fraction of nonzero entries of the planted signal.
    pub sparsity: f64,
    /// Relative noise level on the observations.
    pub noise: f64,
    pub seed: u64,
    pub lambda: f64,
    pub tau: f64,
    pub radius: f64,
}

impl Default for PhaseRetrievalOptions {
    fn default() -> Self {
        Self {
            sparsity: 0.1,
            noise: 0.001,
            seed: 0,
            lambda: 0.01,
            tau: 0.1,
            radius: 10.0,
        }
    }
}

impl<T: Scalar> PhaseRetrievalProblem<T> {
    pub fn new(measurements: Matrix<T>, observations: Vec<T>, regularizer: ProxOperator<T>) -> Result<Self> {
        if observations.len() != measurements.rows() {
            return Err(Error::DimensionMismatch {
                expected: measurements.rows(),
                found: observations.len(),
            });
        }
        if measurements.rows() == 0 || measurements.cols() == 0 {
            return Err(Error::Shape("empty measurement matrix".into()));
        }
        if let Some(i) = observations.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        regularizer.validate()?;
        Ok(Self {
            measurements,
            observations,
            regularizer,
            ground_truth: None,
        })
    }

    /// Plants a signal with `⌊sparsity·n⌋` standard-normal nonzeros on a random
    /// support, sets `u = (Ax)⊙(Ax)` and `y = u + noise·‖u‖·ξ` with `ξ` standard normal.
    pub fn generate(data: &DatasetMatrix<T>, opts: &PhaseRetrievalOptions) -> Result<Self> {
        let a = data.matrix().clone();
        let (rows, n) = (a.rows(), a.cols());
        let support_size = (opts.sparsity * n as f64).floor() as usize;
        if !(0.0..=1.0).contains(&opts.sparsity) || opts.noise < 0.0 {
            return Err(Error::InvalidParameter(
                "sparsity must lie in [0, 1] and noise must be nonnegative".into(),
            ));
        }
        let mut signal_rng = stream(opts.seed, SeedDomain::Signal);
        let mut signal = vec![T::zero(); n];
        let mut support = sample(&mut signal_rng, n, support_size).into_vec();
        support.sort_unstable();
        for &j in &support {
            signal[j] = T::cast(StandardNormal.sample(&mut signal_rng));
        }
        let u: Vec<T> = (0..rows)
            .map(|i| {
                let ip = dot(a.row(i), &signal);
                ip * ip
            })
            .collect();
        let u_norm = u.iter().map(|&v| v * v).sum::<T>().sqrt();
        let scale = T::cast(opts.noise) * u_norm;
        let mut noise_rng = stream(opts.seed, SeedDomain::Noise);
        let y = u
            .into_iter()
            .map(|ui| ui + scale * T::cast(StandardNormal.sample(&mut noise_rng)))
            .collect();
        let h = ProxOperator::capped_l1(T::cast(opts.lambda), T::cast(opts.tau), T::cast(opts.radius))?;
        let mut problem = Self::new(a, y, h)?;
        problem.ground_truth = Some(DenseVector::new(signal)?);
        Ok(problem)
    }

    pub fn measurements(&self) -> &Matrix<T> {
        &self.measurements
    }

    pub fn observations(&self) -> &[T] {
        &self.observations
    }

    /// The planted signal, when the instance was synthesized.
    pub fn ground_truth(&self) -> Option<&DenseVector<T>> {
        self.ground_truth.as_ref()
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

impl<T: Scalar> FiniteSumProblem<T> for PhaseRetrievalProblem<T> {
    fn dimension(&self) -> usize {
        self.measurements.cols()
    }

    fn num_components(&self) -> usize {
        self.measurements.rows()
    }

    fn accumulate_component_gradient(&self, i: usize, x: &[T], weight: T, out: &mut [T]) {
        let row = self.measurements.row(i);
        let ip = dot(row, x);
        let coef = weight * T::cast(4.0) * (ip * ip - self.observations[i]) * ip;
        for (o, &a) in out.iter_mut().zip(row) {
            *o = *o + coef * a;
        }
    }

    fn smooth_value(&self, x: &[T]) -> T {
        let total: T = (0..self.num_components())
            .map(|i| {
                let ip = dot(self.measurements.row(i), x);
                let r = ip * ip - self.observations[i];
                r * r
            })
            .sum();
        total / T::cast(self.num_components() as f64)
    }

    fn regularizer(&self) -> &ProxOperator<T> {
        &self.regularizer
    }

    fn descriptor(&self) -> String {
        format!("phase_retrieval(N={},n={})", self.num_components(), self.dimension())
    }

    fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.descriptor().as_bytes());
        for v in self.measurements.as_slice().iter().chain(&self.observations) {
            hasher.update(v.as_f64().to_le_bytes());
        }
        hasher.update(serde_json::to_vec(&self.regularizer.cast_f64()).unwrap_or_default());
        hex::encode(hasher.finalize())
    }
}
