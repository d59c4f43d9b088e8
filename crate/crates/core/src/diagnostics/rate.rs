use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::trace::RunTrace;

/// Fewest steps a trace needs before a rate is fitted.
pub const MIN_RATE_ITERS: usize = 100;

/// Least-squares fit `log A_T ≈ slope · log T + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Number of `(T, A_T)` points used.
    pub points: usize,
}

/// Fits the decay rate of the running average of the stationarity residual.
///
/// The residual is averaged across `traces` at each step, then
/// `A_T = (1/T) Σ_{t=1..T} s_t` is regressed on `T` in log-log scale over the
/// second half of the common length. Nonpositive averages are skipped.
pub fn fit_rate(traces: &[RunTrace]) -> Result<RateFit> {
    if traces.is_empty() {
        return Err(Error::EmptyInput);
    }
    let len = traces.iter().map(RunTrace::iterations).min().unwrap_or(0);
    if len < MIN_RATE_ITERS {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least {MIN_RATE_ITERS} iterations per trace, shortest has {len}"
        )));
    }
    let k = traces.len() as f64;
    let mean: Vec<f64> = (1..=len)
        .map(|t| traces.iter().map(|tr| tr.records[t].stationarity).sum::<f64>() / k)
        .collect();
    fit_running_average(&mean)
}

/// Same fit for a raw sequence `s_1, s_2, ...` (index 0 is `t = 1`).
pub fn fit_running_average(values: &[f64]) -> Result<RateFit> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least two values".into()));
    }
    let mut sum = 0.0;
    let averages: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            sum += s;
            sum / (i + 1) as f64
        })
        .collect();
    let start = averages.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = averages
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, &a)| a > 0.0 && a.is_finite())
        .map(|(i, &a)| (((i + 1) as f64).ln(), a.ln()))
        .unzip();
    least_squares(&xs, &ys)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    let m = xs.len();
    if m < 2 {
        return Err(Error::InvalidParameter("too few positive points for a rate fit".into()));
    }
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        points: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_sqrt_sequence() {
        let s: Vec<f64> = (1..=10_000).map(|t| 3.0 / (t as f64).sqrt()).collect();
        let fit = fit_running_average(&s).unwrap();
        assert!((fit.slope + 0.5).abs() <= 0.02, "slope {}", fit.slope);
        assert_eq!(fit.points, 5000);
    }

    #[test]
    fn constant_sequence_has_zero_slope() {
        let fit = fit_running_average(&vec![0.7; 400]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!((fit.intercept - 0.7_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zeros_are_skipped() {
        let mut s = vec![0.0; 300];
        s[0] = 1.0;
        // running average 1/T
        let fit = fit_running_average(&s).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!(fit_running_average(&[0.0; 50]).is_err());
    }
}
