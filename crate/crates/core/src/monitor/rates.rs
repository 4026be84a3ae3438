use serde::Serialize;

use super::NormSeries;
use crate::error::{Error, Result};

/// Minimum number of samples for a rate fit.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares power law `‖∇ᵏu(t)‖₂² ≈ C·t^slope` over a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub k: usize,
    pub window: (f64, f64),
    pub samples: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `exp(intercept)`.
    pub fitted_constant: f64,
    pub r2: f64,
    /// Analytic exponent, when one is known.
    pub predicted: Option<f64>,
}

/// Ordinary least squares `y = a + b·x`; returns `(b, a, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // residuals at roundoff level count as a perfect fit
    let floor = f64::EPSILON * f64::EPSILON * n * (1.0 + my * my);
    let r2 = if ss_res > floor && syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

fn in_window(t: f64, (lo, hi): (f64, f64)) -> bool {
    t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)
}

/// Fit the slope of `log ‖∇ᵏu‖₂²` against `log t` inside `window`.
pub fn rate_fit(series: &NormSeries, k: usize, window: (f64, f64)) -> Result<RateFit> {
    if k > series.order() {
        return Err(Error::InvalidArgument(format!(
            "order {k} not in series of order {}",
            series.order()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(&series.norms[k])
        .filter(|(&t, &v)| in_window(t, window) && v > 0.0 && v.is_finite())
        .map(|(t, v)| (t.ln(), v.ln()))
        .unzip();
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooSparse {
            available: xs.len(),
            required: MIN_FIT_SAMPLES,
        });
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(RateFit {
        k,
        window,
        samples: xs.len(),
        slope,
        intercept,
        fitted_constant: intercept.exp(),
        r2,
        predicted: None,
    })
}

/// `[10·dt, T/10]` restricted to samples whose `k`-th seminorm exceeds
/// `10³·ε` times the `L²` norm; `None` if no sample qualifies.
pub fn default_window(series: &NormSeries, step: f64, horizon: f64, k: usize) -> Option<(f64, f64)> {
    let lo = 10.0 * step;
    let hi = horizon / 10.0;
    let floor = 1e3 * f64::EPSILON;
    let usable: Vec<f64> = series
        .times
        .iter()
        .enumerate()
        .filter(|&(j, &t)| {
            t >= lo && t <= hi && series.norms[k][j] > floor * series.norms[0][j]
        })
        .map(|(_, &t)| t)
        .collect();
    Some((*usable.first()?, *usable.last()?))
}

/// Outcome of the `tᵏ‖∇ᵏu(t)‖₂² ≤ C_T(‖u₀‖₂² + ‖f‖²_{Hᵏ})` check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingBound {
    pub k: usize,
    pub passed: bool,
    /// Supremum of the normalised ratio over the series.
    pub fitted_ct: f64,
    pub sup_time: f64,
    /// Log-log slope of the ratio over the earliest samples; negative
    /// values mean the ratio grows as `t → 0`.
    pub early_slope: f64,
}

/// Tolerance on the early slope of the normalised ratio.
pub const EARLY_SLOPE_TOLERANCE: f64 = 0.05;

/// The bound holds when the normalised ratio stays finite and does not grow
/// as `t → 0` over the earliest quarter of the samples (at least three).
pub fn check_smoothing_bound(series: &NormSeries, k: usize) -> Result<SmoothingBound> {
    if k > series.order() {
        return Err(Error::InvalidArgument(format!(
            "order {k} not in series of order {}",
            series.order()
        )));
    }
    let denom = series.data.smoothing_denominator(k);
    let ratios: Vec<f64> = series
        .times
        .iter()
        .zip(&series.norms[k])
        .map(|(t, v)| {
            if denom > 0.0 {
                t.powi(k as i32) * v / denom
            } else {
                0.0
            }
        })
        .collect();
    let finite = ratios.iter().all(|r| r.is_finite());
    let (sup_j, sup) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bj, bv), (j, v)| {
            if v > bv {
                (j, v)
            } else {
                (bj, bv)
            }
        });
    let early = (series.len() / 4).max(3).min(series.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = series.times[..early]
        .iter()
        .zip(&ratios[..early])
        .filter(|(_, &r)| r > 0.0)
        .map(|(t, r)| (t.ln(), r.ln()))
        .unzip();
    let early_slope = if xs.len() >= 2 {
        linear_fit(&xs, &ys).0
    } else {
        f64::INFINITY
    };
    Ok(SmoothingBound {
        k,
        passed: finite && early_slope >= -EARLY_SLOPE_TOLERANCE,
        fitted_ct: sup.max(0.0),
        sup_time: series.times.get(sup_j).copied().unwrap_or(0.0),
        early_slope,
    })
}

/// `count` logarithmically spaced times from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// `count` evenly spaced times from `lo` to `hi` inclusive.
pub fn linear_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}
