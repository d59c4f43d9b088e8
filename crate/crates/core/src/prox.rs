//! Generalized proximal operators `Prox_h(a; v) = argmin_x h(x) + ½‖x − a‖_v²`.
//!
//! Separable regularizers are solved coordinate by coordinate with the weight
//! `v_i` acting as the curvature of the quadratic. The orthogonality indicator
//! has a closed form only under a uniform metric, where it reduces to the
//! nearest matrix with orthonormal columns.
//!
//! Other operators with closed-form generalized proxes (log-sum, MCP, Geman,
//! `ℓ_p` quasi-norms, rank indicators) are not provided.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{polar_factor, Matrix};
use crate::scalar::Scalar;
use crate::vector::{DenseVector, WeightVector};

/// Relative spread tolerated when the orthogonality prox checks that the
/// metric is uniform.
const UNIFORM_METRIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxOperator<T> {
    /// `h = 0`.
    Zero,
    /// Indicator of `{x : ‖x‖_∞ ≤ radius}`.
    Box { radius: T },
    /// `λ‖x‖₁`, optionally restricted to the box of the given radius.
    L1 { lambda: T, radius: Option<T> },
    /// `λ Σ max(|x_i|, τ)` restricted to `‖x‖_∞ ≤ radius`.
    CappedL1 { lambda: T, tau: T, radius: T },
    /// Indicator of `{X ∈ R^{rows×cols} : XᵀX = I}` on the column-stacked vector.
    Stiefel { rows: usize, cols: usize },
}

/// Value of a regularizer: finite, or outside the domain of an indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegValue<T> {
    Finite(T),
    Infeasible,
}

impl<T: Scalar> RegValue<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, RegValue::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            RegValue::Finite(v) => Some(v),
            RegValue::Infeasible => None,
        }
    }
}

impl<T: Scalar> ProxOperator<T> {
    pub fn boxed(radius: T) -> Result<Self> {
        let op = ProxOperator::Box { radius };
        op.validate()?;
        Ok(op)
    }

    pub fn l1(lambda: T, radius: Option<T>) -> Result<Self> {
        let op = ProxOperator::L1 { lambda, radius };
        op.validate()?;
        Ok(op)
    }

    pub fn capped_l1(lambda: T, tau: T, radius: T) -> Result<Self> {
        let op = ProxOperator::CappedL1 { lambda, tau, radius };
        op.validate()?;
        Ok(op)
    }

    pub fn stiefel(rows: usize, cols: usize) -> Result<Self> {
        let op = ProxOperator::Stiefel { rows, cols };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        let nonneg = |name: &str, v: T| {
            if v.is_finite() && v >= T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")))
            }
        };
        match *self {
            ProxOperator::Zero => Ok(()),
            ProxOperator::Box { radius } => positive("radius", radius),
            ProxOperator::L1 { lambda, radius } => {
                nonneg("lambda", lambda)?;
                radius.map_or(Ok(()), |r| positive("radius", r))
            }
            ProxOperator::CappedL1 { lambda, tau, radius } => {
                nonneg("lambda", lambda)?;
                positive("tau", tau)?;
                positive("radius", radius)
            }
            ProxOperator::Stiefel { rows, cols } => {
                if cols >= 1 && rows >= cols {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "orthogonality constraint needs rows >= cols >= 1, got {rows}x{cols}"
                    )))
                }
            }
        }
    }

    /// The same operator with parameters converted to `f64`.
    pub fn cast_f64(&self) -> ProxOperator<f64> {
        match *self {
            ProxOperator::Zero => ProxOperator::Zero,
            ProxOperator::Box { radius } => ProxOperator::Box {
                radius: radius.as_f64(),
            },
            ProxOperator::L1 { lambda, radius } => ProxOperator::L1 {
                lambda: lambda.as_f64(),
                radius: radius.map(Scalar::as_f64),
            },
            ProxOperator::CappedL1 { lambda, tau, radius } => ProxOperator::CappedL1 {
                lambda: lambda.as_f64(),
                tau: tau.as_f64(),
                radius: radius.as_f64(),
            },
            ProxOperator::Stiefel { rows, cols } => ProxOperator::Stiefel { rows, cols },
        }
    }

    /// Fixed dimension of the operator, when it has one.
    pub fn dimension(&self) -> Option<usize> {
        match *self {
            ProxOperator::Stiefel { rows, cols } => Some(rows * cols),
            _ => None,
        }
    }

    /// Whether the domain of `h` is bounded.
    pub fn is_bounding(&self) -> bool {
        match self {
            ProxOperator::Zero => false,
            ProxOperator::L1 { radius, .. } => radius.is_some(),
            _ => true,
        }
    }

    fn check_dimension(&self, len: usize) -> Result<()> {
        match self.dimension() {
            Some(expected) if expected != len => Err(Error::DimensionMismatch { expected, found: len }),
            _ => Ok(()),
        }
    }

    /// Computes a global minimizer of `h(x) + ½‖x − a‖_v²`.
    pub fn prox(&self, a: &DenseVector<T>, v: &WeightVector<T>) -> Result<DenseVector<T>> {
        self.validate()?;
        if a.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: v.len(),
            });
        }
        self.check_dimension(a.len())?;
        let coords = a.as_slice().iter().zip(v.as_slice());
        let out: Vec<T> = match *self {
            ProxOperator::Zero => return Ok(a.clone()),
            ProxOperator::Box { radius } => a.iter().map(|&x| clamp(x, radius)).collect(),
            ProxOperator::L1 { lambda, radius } => coords
                .map(|(&ai, &ci)| {
                    let shrunk = ai.signum() * (ai.abs() - lambda / ci).max(T::zero());
                    radius.map_or(shrunk, |r| clamp(shrunk, r))
                })
                .collect(),
            ProxOperator::CappedL1 { lambda, tau, radius } => coords
                .map(|(&ai, &ci)| prox_capped_l1_scalar(ai, ci, lambda, tau, radius))
                .collect(),
            ProxOperator::Stiefel { rows, cols } => {
                if !v.is_uniform(T::cast(UNIFORM_METRIC_TOL)) {
                    return Err(Error::UnsupportedMetric(
                        "orthogonality prox has a closed form only for a uniform weight vector".into(),
                    ));
                }
                return prox_stiefel(a, rows, cols);
            }
        };
        DenseVector::new(out)
    }

    /// Evaluates `h(x)`; indicator violations are reported as [`RegValue::Infeasible`].
    pub fn evaluate(&self, x: &DenseVector<T>) -> RegValue<T> {
        let in_box = |r: T| x.iter().all(|&xi| xi.abs() <= r);
        match *self {
            ProxOperator::Zero => RegValue::Finite(T::zero()),
            ProxOperator::Box { radius } => {
                if in_box(radius) {
                    RegValue::Finite(T::zero())
                } else {
                    RegValue::Infeasible
                }
            }
            ProxOperator::L1 { lambda, radius } => {
                if radius.is_some_and(|r| !in_box(r)) {
                    return RegValue::Infeasible;
                }
                RegValue::Finite(lambda * x.iter().map(|xi| xi.abs()).sum::<T>())
            }
            ProxOperator::CappedL1 { lambda, tau, radius } => {
                if !in_box(radius) {
                    return RegValue::Infeasible;
                }
                RegValue::Finite(lambda * x.iter().map(|xi| xi.abs().max(tau)).sum::<T>())
            }
            ProxOperator::Stiefel { rows, cols } => {
                if x.len() != rows * cols {
                    return RegValue::Infeasible;
                }
                match orthonormality_error(x.as_slice(), rows, cols) {
                    Some(err) if err <= T::feasibility_tol() => RegValue::Finite(T::zero()),
                    _ => RegValue::Infeasible,
                }
            }
        }
    }

    /// The indicator part of `h` alone (used by the projection baseline).
    pub fn indicator_part(&self) -> ProxOperator<T> {
        match *self {
            ProxOperator::Zero => ProxOperator::Zero,
            ProxOperator::Box { radius } => ProxOperator::Box { radius },
            ProxOperator::L1 { radius, .. } => radius.map_or(ProxOperator::Zero, |radius| ProxOperator::Box { radius }),
            ProxOperator::CappedL1 { radius, .. } => ProxOperator::Box { radius },
            ProxOperator::Stiefel { rows, cols } => ProxOperator::Stiefel { rows, cols },
        }
    }

    /// A subgradient of the penalty part of `h` (the indicator is excluded).
    ///
    /// For the capped penalty the flat region `|x_i| < τ` contributes zero;
    /// at `|x_i| ≥ τ` the slope is `λ sign(x_i)`.
    pub fn penalty_subgradient(&self, x: &DenseVector<T>) -> Result<DenseVector<T>> {
        let out = match *self {
            ProxOperator::L1 { lambda, .. } => x
                .iter()
                .map(|&xi| if xi.is_zero() { T::zero() } else { lambda * xi.signum() })
                .collect(),
            ProxOperator::CappedL1 { lambda, tau, .. } => x
                .iter()
                .map(|&xi| {
                    if xi.abs() >= tau {
                        lambda * xi.signum()
                    } else {
                        T::zero()
                    }
                })
                .collect(),
            _ => vec![T::zero(); x.len()],
        };
        DenseVector::new(out)
    }
}

#[inline]
fn clamp<T: Scalar>(x: T, radius: T) -> T {
    x.max(-radius).min(radius)
}

#[inline]
fn capped_l1_objective<T: Scalar>(x: T, a: T, c: T, lambda: T, tau: T) -> T {
    let diff = x - a;
    T::cast(0.5) * c * diff * diff + lambda * x.abs().max(tau)
}

/// Minimizes `q(x) = (c/2)(x − a)² + λ max(|x|, τ)` over `[−r, r]`.
///
/// The objective is a convex piece on each of `[−r, −τ]`, `[−τ, τ]` and
/// `[τ, r]`, so the minimizer is one of: `0`, `±r`, the clipped stationary
/// points `P(a − λ/c)`, `P(a)`, `P(a + λ/c)`, or a breakpoint `±τ` when a
/// piece's stationary point lies outside it. All candidates are scored
/// without case conditions; exact ties go to the smallest `|x|`.
pub fn prox_capped_l1_scalar<T: Scalar>(a: T, c: T, lambda: T, tau: T, radius: T) -> T {
    let shift = lambda / c;
    let candidates = [
        T::zero(),
        -radius,
        radius,
        clamp(a - shift, radius),
        clamp(a, radius),
        clamp(a + shift, radius),
        clamp(tau, radius),
        clamp(-tau, radius),
    ];
    let mut best = candidates[0];
    let mut best_q = capped_l1_objective(best, a, c, lambda, tau);
    for &x in &candidates[1..] {
        let q = capped_l1_objective(x, a, c, lambda, tau);
        if q < best_q || (q == best_q && x.abs() < best.abs()) {
            best = x;
            best_q = q;
        }
    }
    best
}

/// Nearest matrix with orthonormal columns to `mat(a)` (column-stacked
/// `rows × cols`), returned column-stacked. Independent of the (uniform) metric.
pub fn prox_stiefel<T: Scalar>(a: &DenseVector<T>, rows: usize, cols: usize) -> Result<DenseVector<T>> {
    let m = Matrix::from_col_major(rows, cols, a.as_slice())?;
    let x = polar_factor(&m)?;
    DenseVector::new(x.to_col_major())
}

/// `‖XᵀX − I‖_∞` for the column-stacked `rows × cols` matrix.
pub fn orthonormality_error<T: Scalar>(x: &[T], rows: usize, cols: usize) -> Option<T> {
    let m = Matrix::from_col_major(rows, cols, x).ok()?;
    let g = m.transpose().matmul(&m).ok()?;
    let mut worst = T::zero();
    for i in 0..cols {
        for j in 0..cols {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DenseVector<f64> {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn ones(n: usize) -> WeightVector<f64> {
        WeightVector::uniform(n, 1.0).unwrap()
    }

    /// Brute-force minimum of q over a grid of step `h` on [-r, r].
    fn grid_min(a: f64, c: f64, lambda: f64, tau: f64, r: f64, h: f64) -> (f64, f64) {
        let steps = (2.0 * r / h).round() as i64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=steps {
            let x = -r + k as f64 * h;
            let q = capped_l1_objective(x, a, c, lambda, tau);
            if q < best.0 {
                best = (q, x);
            }
        }
        best
    }

    #[test]
    fn zero_and_box_examples() {
        let out = ProxOperator::Zero.prox(&dv(&[1.0, -2.0]), &ones(2)).unwrap();
        assert_eq!(out.as_slice(), &[1.0, -2.0]);
        let v = WeightVector::new(vec![0.3, 7.0]).unwrap();
        let out = ProxOperator::boxed(10.0).unwrap().prox(&dv(&[12.0, -3.0]), &v).unwrap();
        assert_eq!(out.as_slice(), &[10.0, -3.0]);
    }

    #[test]
    fn capped_l1_large_input_oracle() {
        // grid brute force over [-10, 10] with step 1e-5 lands on 4
        let (_, xg) = grid_min(5.0, 1.0, 1.0, 0.1, 10.0, 1e-5);
        assert!((xg - 4.0).abs() < 1e-5);
        let h = ProxOperator::capped_l1(1.0, 0.1, 10.0).unwrap();
        let out = h.prox(&dv(&[5.0]), &ones(1)).unwrap();
        assert_eq!(out.as_slice(), &[4.0]);
    }

    #[test]
    fn capped_l1_scalar_examples() {
        for &(c, l, t, r) in &[(1.0, 1.0, 0.1, 10.0), (3.0, 0.2, 0.5, 2.0), (0.1, 5.0, 1.0, 1.0)] {
            assert_eq!(prox_capped_l1_scalar(0.0, c, l, t, r), 0.0);
        }
        assert_eq!(prox_capped_l1_scalar(3.0, 1.0, 0.0, 0.1, 10.0), 3.0);
        assert_eq!(prox_capped_l1_scalar(12.0, 1.0, 0.0, 0.1, 10.0), 10.0);

        // small-|x| regime: the flat piece of the penalty keeps x = a
        let got: f64 = prox_capped_l1_scalar(0.05, 1.0, 1.0, 0.1, 10.0);
        let (qg, xg) = grid_min(0.05, 1.0, 1.0, 0.1, 10.0, 1e-5);
        assert!((got - 0.05).abs() < 1e-15);
        assert!((xg - 0.05).abs() < 1e-5);
        assert!(capped_l1_objective(got, 0.05, 1.0, 1.0, 0.1) <= qg + 1e-12);
    }

    #[test]
    fn capped_l1_breakpoint_minimizer() {
        // the minimizer sits on the breakpoint x = τ, which is not one of the
        // clipped stationary points
        let got: f64 = prox_capped_l1_scalar(0.15, 1.0, 1.0, 0.1, 10.0);
        let (qg, xg) = grid_min(0.15, 1.0, 1.0, 0.1, 10.0, 1e-5);
        assert!((xg - 0.1).abs() < 1e-9);
        assert!((got - 0.1).abs() < 1e-15);
        assert!((capped_l1_objective(got, 0.15, 1.0, 1.0, 0.1) - qg).abs() < 1e-12);
    }

    #[test]
    fn l1_soft_threshold() {
        let h = ProxOperator::l1(1.0, Some(2.0)).unwrap();
        let v = WeightVector::new(vec![1.0, 2.0, 1.0, 1.0]).unwrap();
        let out = h.prox(&dv(&[3.0, -1.0, 0.5, 5.0]), &v).unwrap();
        assert_eq!(out.as_slice(), &[2.0, -0.5, 0.0, 2.0]);
    }

    #[test]
    fn stiefel_examples() {
        // orthonormal input is a fixed point
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = dv(&[s, s, 0.0, -s, s, 0.0]);
        let out = prox_stiefel(&m, 3, 2).unwrap();
        for (a, b) in out.iter().zip(m.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        // diag(2, 3) maps to the identity
        let out = prox_stiefel(&dv(&[2.0, 0.0, 0.0, 3.0]), 2, 2).unwrap();
        for (a, b) in out.iter().zip(&[1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn stiefel_rejects_non_uniform_metric() {
        let h = ProxOperator::stiefel(2, 1).unwrap();
        let v = WeightVector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(h.prox(&dv(&[1.0, 1.0]), &v), Err(Error::UnsupportedMetric(_))));
        assert!(matches!(
            h.prox(&dv(&[1.0, 1.0, 1.0]), &ones(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        // a uniform metric of any scale gives the same answer
        let a = dv(&[3.0, 4.0]);
        let x1 = h.prox(&a, &ones(2)).unwrap();
        let x2 = h.prox(&a, &WeightVector::uniform(2, 17.0).unwrap()).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn evaluate_examples() {
        let h = ProxOperator::capped_l1(0.01, 0.1, 10.0).unwrap();
        let RegValue::Finite(v) = h.evaluate(&DenseVector::<f64>::zeros(2)) else {
            panic!("expected finite value")
        };
        assert!((v - 0.002).abs() < 1e-18);
        assert_eq!(
            ProxOperator::boxed(1.0).unwrap().evaluate(&dv(&[2.0, 0.0])),
            RegValue::Infeasible
        );
        let st = ProxOperator::stiefel(2, 2).unwrap();
        assert_eq!(st.evaluate(&dv(&[0.0, 1.0, 1.0, 0.0])), RegValue::Finite(0.0));
        assert_eq!(st.evaluate(&dv(&[1.0, 1.0, 1.0, 0.0])), RegValue::Infeasible);
    }

    #[test]
    fn parameter_validation() {
        assert!(ProxOperator::capped_l1(-1.0, 0.1, 1.0).is_err());
        assert!(ProxOperator::capped_l1(1.0, 0.0, 1.0).is_err());
        assert!(ProxOperator::capped_l1(1.0, 0.1, 0.0).is_err());
        assert!(ProxOperator::boxed(f64::NAN).is_err());
        assert!(ProxOperator::<f64>::stiefel(2, 3).is_err());
        assert!(ProxOperator::<f64>::stiefel(2, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn capped_l1_beats_coarse_grid(
            a in -12.0f64..12.0,
            c in 0.05f64..20.0,
            lambda in 0.0f64..3.0,
            tau in 0.01f64..2.0,
            r in 0.2f64..5.0,
        ) {
            let x = prox_capped_l1_scalar(a, c, lambda, tau, r);
            prop_assert!(x.abs() <= r);
            let qx = capped_l1_objective(x, a, c, lambda, tau);
            let steps = (2.0 * r / 1e-3).ceil() as i64;
            for k in 0..=steps {
                let g = (-r + k as f64 * 1e-3).min(r);
                prop_assert!(qx <= capped_l1_objective(g, a, c, lambda, tau) + 1e-9);
            }
        }

        #[test]
        fn capped_l1_metric_scaling(
            a in prop::collection::vec(-5.0f64..5.0, 1..8),
            scale in 0.1f64..10.0,
            lambda in 0.0f64..2.0,
        ) {
            let n = a.len();
            let a = DenseVector::new(a).unwrap();
            let v = WeightVector::new((0..n).map(|i| 0.5 + i as f64).collect()).unwrap();
            let cv = WeightVector::new(v.as_slice().iter().map(|x| x * scale).collect()).unwrap();
            let lhs = ProxOperator::capped_l1(lambda, 0.3, 4.0).unwrap().prox(&a, &cv).unwrap();
            let rhs = ProxOperator::capped_l1(lambda / scale, 0.3, 4.0).unwrap().prox(&a, &v).unwrap();
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }

        #[test]
        fn prox_output_is_feasible(
            a in prop::collection::vec(-50.0f64..50.0, 6),
            w in 0.01f64..100.0,
        ) {
            let a = DenseVector::new(a).unwrap();
            let v = WeightVector::uniform(6, w).unwrap();
            let ops = [
                ProxOperator::Zero,
                ProxOperator::boxed(1.5).unwrap(),
                ProxOperator::l1(0.7, Some(2.0)).unwrap(),
                ProxOperator::capped_l1(0.4, 0.1, 3.0).unwrap(),
                ProxOperator::stiefel(3, 2).unwrap(),
            ];
            for op in &ops {
                let x = op.prox(&a, &v).unwrap();
                prop_assert!(op.evaluate(&x).is_finite());
            }
        }

        #[test]
        fn stiefel_output_orthonormal(m in prop::collection::vec(-3.0f64..3.0, 12)) {
            let x = prox_stiefel(&DenseVector::new(m).unwrap(), 4, 3).unwrap();
            prop_assert!(orthonormality_error(x.as_slice(), 4, 3).unwrap() <= 1e-10);
        }
    }
}
