//! Monte-Carlo estimators shared by the statistical operations.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Effective sample size; equals the sample count for unweighted means.
    pub n_effective: f64,
    pub n_samples: usize,
}

impl McEstimate {
    pub fn exact(value: f64, n_samples: usize) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_effective: n_samples as f64,
            n_samples,
        }
    }

    /// value / std_error, with 0 for an exactly vanishing estimate.
    pub fn z(&self) -> f64 {
        z_score(self.value, self.std_error)
    }
}

pub(crate) fn z_score(value: f64, se: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else if se == 0.0 {
        value.signum() * f64::INFINITY
    } else {
        value / se
    }
}

/// z-score of the difference of two independent estimates.
pub fn combined_z(a: &McEstimate, b: &McEstimate) -> f64 {
    z_score(a.value - b.value, a.std_error.hypot(b.std_error))
}

/// Plain sample mean with standard error s/√N.
pub fn mean_estimate(values: &[f64]) -> Result<McEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(McEstimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        n_effective: n as f64,
        n_samples: n,
    })
}

/// Self-normalized importance-sampling estimate Σwf/Σw from log-weights
/// (−∞ for zero weight), with delta-method standard error
/// sqrt(Σw²(f − v)²)/Σw and effective sample size (Σw)²/Σw².
pub fn self_normalized(log_w: &[f64], f: &[f64]) -> Result<McEstimate> {
    assert_eq!(log_w.len(), f.len());
    let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::DegenerateEnsemble);
    }
    let w: Vec<f64> = log_w.iter().map(|&l| (l - shift).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    // centred on a sampled value so that constant observables are exact
    let anchor = w.iter().zip(f).find(|(w, _)| **w > 0.0).map_or(0.0, |(_, f)| *f);
    let value = anchor + w.iter().zip(f).map(|(w, f)| w * (f - anchor)).sum::<f64>() / sw;
    let var = w
        .iter()
        .zip(f)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, f)| (w * (f - value)).powi(2))
        .sum::<f64>();
    Ok(McEstimate {
        value,
        std_error: var.sqrt() / sw,
        n_effective: sw * sw / sw2,
        n_samples: f.len(),
    })
}

/// Two-sided standard normal quantile for the given confidence level.
pub fn normal_quantile_two_sided(confidence: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + confidence / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = normal_quantile_two_sided(confidence);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means.
pub fn batch_means(series: &[f64], batches: usize) -> Result<McEstimate> {
    let b = batches.max(2);
    let len = series.len() / b;
    if len == 0 {
        return Err(Error::InvalidParameter(format!(
            "series of length {} is too short for {b} batches",
            series.len()
        )));
    }
    let means: Vec<f64> = series
        .chunks_exact(len)
        .take(b)
        .map(|c| c.iter().sum::<f64>() / len as f64)
        .collect();
    let est = mean_estimate(&means)?;
    let total = series.iter().sum::<f64>() / series.len() as f64;
    let var_iid = series.iter().map(|x| (x - total).powi(2)).sum::<f64>() / series.len() as f64;
    let ess = if est.std_error > 0.0 {
        (var_iid / est.std_error.powi(2)).min(series.len() as f64)
    } else {
        series.len() as f64
    };
    Ok(McEstimate {
        value: total,
        std_error: est.std_error,
        n_effective: ess,
        n_samples: series.len(),
    })
}

/// Weighted least-squares line y = a + b x; returns (b, se_b).
pub fn weighted_slope(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if x.len() < 2 || sw <= 0.0 {
        return None;
    }
    let mx = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    Some((sxy / sxx, (1.0 / sxx).sqrt()))
}
