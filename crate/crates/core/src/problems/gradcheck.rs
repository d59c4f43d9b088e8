use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::DenseVector;

use super::FiniteSumProblem;

/// Compares the analytic full gradient with central finite differences of
/// the smooth objective and returns the worst coordinate error, scaled by the
/// largest gradient magnitude (`max_j |fd_j − g_j| / max(‖g‖_∞, ‖fd‖_∞)`).
///
/// Returns `0` when both gradients vanish identically.
pub fn gradient_check<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &DenseVector<T>,
    eps: T,
) -> Result<T> {
    let analytic = problem.full_gradient(x)?;
    let mut probe = x.as_slice().to_vec();
    let mut fd = Vec::with_capacity(probe.len());
    for j in 0..probe.len() {
        let orig = probe[j];
        probe[j] = orig + eps;
        let plus = problem.smooth_value(&probe);
        probe[j] = orig - eps;
        let minus = problem.smooth_value(&probe);
        probe[j] = orig;
        fd.push((plus - minus) / (eps + eps));
    }
    let scale = fd
        .iter()
        .chain(analytic.iter())
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale.is_zero() {
        return Ok(T::zero());
    }
    Ok(fd
        .iter()
        .zip(analytic.iter())
        .map(|(&a, &b)| (a - b).abs() / scale)
        .fold(T::zero(), T::max))
}
