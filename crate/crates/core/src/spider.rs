//! SPIDER recursive gradient estimator.
//!
//! At every `t` with `t mod q = 0` the estimate is the exact full gradient.
//! In between, a minibatch `I` of size `b` is drawn uniformly with
//! replacement and
//!
//! ```text
//! g^t = g^{t-1} + ∇f(y^t; I) − ∇f(y^{t-1}; I)
//! ```
//!
//! where `∇f(·; I)` is the minibatch mean with repeated indices counted with
//! multiplicity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::FiniteSumProblem;
use crate::rng::{stream, SeedDomain};
use crate::scalar::Scalar;
use crate::vector::DenseVector;

/// Gradient work done so far.
///
/// A full gradient counts once in `full_evals`; a stochastic step counts its
/// `b` drawn indices in `component_evals`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradientCost {
    pub full_evals: u64,
    pub component_evals: u64,
}

impl GradientCost {
    /// Total work in component-gradient units, a full gradient costing `n`.
    pub fn total(&self, num_components: usize) -> u64 {
        self.component_evals + num_components as u64 * self.full_evals
    }
}

/// How stochastic steps choose their indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `b` indices drawn uniformly with replacement.
    WithReplacement,
    /// Every index exactly once (debug mode; the differences telescope).
    FullBatch,
}

#[derive(Clone, Debug)]
pub struct SpiderEstimator<T> {
    epoch_len: usize,
    batch_size: usize,
    sampling: Sampling,
    g_prev: Option<DenseVector<T>>,
    y_prev: Option<DenseVector<T>>,
    t: usize,
    rng: ChaCha8Rng,
    cost: GradientCost,
    last_batch: Vec<usize>,
}

impl<T: Scalar> SpiderEstimator<T> {
    pub fn new(epoch_len: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if epoch_len == 0 || batch_size == 0 {
            return Err(Error::InvalidParameter(
                "epoch length q and batch size b must be positive".into(),
            ));
        }
        Ok(Self {
            epoch_len,
            batch_size,
            sampling: Sampling::WithReplacement,
            g_prev: None,
            y_prev: None,
            t: 0,
            rng: stream(seed, SeedDomain::Minibatch),
            cost: GradientCost::default(),
            last_batch: Vec::new(),
        })
    }

    /// Exact gradients at every step (`q = 1`).
    pub fn full_batch() -> Self {
        Self::new(1, 1, 0).expect("valid parameters")
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn cost(&self) -> GradientCost {
        self.cost
    }

    /// Indices used by the most recent stochastic step (empty after a refresh).
    pub fn last_batch(&self) -> &[usize] {
        &self.last_batch
    }

    pub fn previous(&self) -> Option<(&DenseVector<T>, &DenseVector<T>)> {
        Some((self.g_prev.as_ref()?, self.y_prev.as_ref()?))
    }

    /// Emits `g^t` for the query point `y^t` and advances `t`.
    pub fn estimate<P: FiniteSumProblem<T> + ?Sized>(
        &mut self,
        problem: &P,
        y: &DenseVector<T>,
    ) -> Result<DenseVector<T>> {
        problem.check_point(y)?;
        let g = if self.t.is_multiple_of(self.epoch_len) {
            self.last_batch.clear();
            self.cost.full_evals += 1;
            problem.full_gradient(y)?
        } else {
            let (g_prev, y_prev) = match (&self.g_prev, &self.y_prev) {
                (Some(g), Some(y)) => (g, y),
                _ => return Err(Error::Domain("estimator must start with a full-gradient step".into())),
            };
            let n = problem.num_components();
            let batch: Vec<usize> = match self.sampling {
                Sampling::WithReplacement => (0..self.batch_size).map(|_| self.rng.random_range(0..n)).collect(),
                Sampling::FullBatch => (0..n).collect(),
            };
            let g = spider_update(problem, &batch, g_prev, y, y_prev)?;
            self.cost.component_evals += batch.len() as u64;
            self.last_batch = batch;
            g
        };
        self.g_prev = Some(g.clone());
        self.y_prev = Some(y.clone());
        self.t += 1;
        Ok(g)
    }
}

/// `g_prev + ∇f(y; batch) − ∇f(y_prev; batch)`.
pub fn spider_update<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    batch: &[usize],
    g_prev: &DenseVector<T>,
    y: &DenseVector<T>,
    y_prev: &DenseVector<T>,
) -> Result<DenseVector<T>> {
    if batch.is_empty() {
        return Err(Error::Domain("empty minibatch".into()));
    }
    let weight = T::one() / T::cast(batch.len() as f64);
    let mut diff = vec![T::zero(); problem.dimension()];
    for &i in batch {
        problem.accumulate_component_gradient(i, y.as_slice(), weight, &mut diff);
        problem.accumulate_component_gradient(i, y_prev.as_slice(), -weight, &mut diff);
    }
    g_prev.add(&DenseVector::new(diff)?)
}

/// `(1/|idx|) Σ_{i ∈ idx} ∇f_i(x)` with multiplicity.
pub fn minibatch_gradient<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    indices: &[usize],
    x: &DenseVector<T>,
) -> Result<DenseVector<T>> {
    problem.check_point(x)?;
    if indices.is_empty() {
        return Err(Error::Domain("empty minibatch".into()));
    }
    let n = problem.num_components();
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("component index {bad} out of range 0..{n}")));
    }
    let weight = T::one() / T::cast(indices.len() as f64);
    let mut out = vec![T::zero(); problem.dimension()];
    for &i in indices {
        problem.accumulate_component_gradient(i, x.as_slice(), weight, &mut out);
    }
    DenseVector::new(out)
}
