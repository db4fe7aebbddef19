//! Large-deviation tails of the interaction energy under μ0.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier_field::{sample_free_field, SeedPolicy};
use crate::observables::{InteractionEvaluator, InteractionSpec};
use crate::stats::{self, McEstimate};

/// Minimum number of hits for a threshold to enter the slope fit.
pub const MIN_FIT_COUNT: u64 = 25;
const BOOTSTRAP_REPLICATES: usize = 400;

#[derive(Debug, Clone, Serialize)]
pub struct TailPoint {
    pub lambda: f64,
    pub count: u64,
    pub probability: McEstimate,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Least-squares slope of ln P against λ with a 95% bootstrap interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailProbabilityCurve {
    pub points: Vec<TailPoint>,
    pub slope: Option<SlopeFit>,
    pub samples: usize,
}

/// Draws of h^I on {|M| ≤ R}; −∞ marks samples outside the mass ball.
pub fn interaction_draws(
    d: usize,
    n: usize,
    interaction: &InteractionSpec,
    radius: f64,
    samples: usize,
    seed: SeedPolicy,
) -> Result<Vec<f64>> {
    let ev = InteractionEvaluator::new(interaction, d, n)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = sample_free_field(d, n, &seed, i)?;
            if ev.wick_mass(&u).abs() <= radius {
                ev.energy(&u)
            } else {
                Ok(f64::NEG_INFINITY)
            }
        })
        .collect()
}

fn counts_above(sorted_desc_draws: &[f64], lambdas: &[f64]) -> Vec<u64> {
    lambdas
        .iter()
        .map(|&l| sorted_desc_draws.partition_point(|&h| h > l) as u64)
        .collect()
}

fn fit(lambdas: &[f64], counts: &[u64], total: usize, use_points: &[usize]) -> Option<f64> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for &i in use_points {
        if counts[i] == 0 {
            continue;
        }
        x.push(lambdas[i]);
        y.push((counts[i] as f64 / total as f64).ln());
        w.push(counts[i] as f64);
    }
    stats::weighted_slope(&x, &y, &w).map(|(b, _)| b)
}

/// μ0-probability of {h^I > λ} ∩ {|M| ≤ R} on a grid of λ values.
pub fn tail_probability(
    d: usize,
    n: usize,
    interaction: &InteractionSpec,
    radius: f64,
    lambdas: &[f64],
    samples: usize,
    seed: SeedPolicy,
) -> Result<TailProbabilityCurve> {
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas.iter().any(|&l| l < 0.0) {
        return Err(Error::InvalidParameter(
            "tail thresholds must be nonnegative and strictly increasing".into(),
        ));
    }
    let draws = interaction_draws(d, n, interaction, radius, samples, seed)?;
    tail_from_draws(&draws, lambdas, seed)
}

/// Tail curve and slope fit from precomputed draws.
pub fn tail_from_draws(draws: &[f64], lambdas: &[f64], seed: SeedPolicy) -> Result<TailProbabilityCurve> {
    let total = draws.len();
    if total < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let counts = counts_above(&sorted, lambdas);
    let points: Vec<TailPoint> = lambdas
        .iter()
        .zip(&counts)
        .map(|(&lambda, &count)| {
            let p = count as f64 / total as f64;
            let (ci_low, ci_high) = stats::wilson_interval(count, total as u64, 0.95);
            TailPoint {
                lambda,
                count,
                probability: McEstimate {
                    value: p,
                    std_error: (p * (1.0 - p) / total as f64).sqrt(),
                    n_effective: total as f64,
                    n_samples: total,
                },
                ci_low,
                ci_high,
            }
        })
        .collect();

    let use_points: Vec<usize> = (0..lambdas.len())
        .filter(|&i| counts[i] >= MIN_FIT_COUNT && counts[i] < total as u64)
        .collect();
    let slope = match fit(lambdas, &counts, total, &use_points) {
        Some(slope) if use_points.len() >= 3 => {
            let mut rng = seed.derive(0x7a11).rng(0);
            let mut replicates: Vec<f64> = (0..BOOTSTRAP_REPLICATES)
                .filter_map(|_| {
                    let mut resampled: Vec<f64> = (0..total).map(|_| draws[rng.gen_range(0..total)]).collect();
                    resampled.sort_by(|a, b| b.total_cmp(a));
                    fit(lambdas, &counts_above(&resampled, lambdas), total, &use_points)
                })
                .collect();
            replicates.sort_by(f64::total_cmp);
            let q = |p: f64| replicates[((replicates.len() - 1) as f64 * p).round() as usize];
            Some(SlopeFit {
                slope,
                ci_low: q(0.025),
                ci_high: q(0.975),
                points_used: use_points.len(),
            })
        }
        _ => None,
    };
    Ok(TailProbabilityCurve {
        points,
        slope,
        samples: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::Potential;

    #[test]
    fn defocusing_sign_has_empty_tail() {
        let spec = InteractionSpec::WickHartree(Potential::parametric(2, 8, -1.0, 0.5).unwrap());
        let c = tail_probability(2, 4, &spec, 5.0, &[0.0, 0.5], 300, SeedPolicy::new(1)).unwrap();
        assert!(c.points.iter().all(|p| p.count == 0 && p.ci_low == 0.0 && p.ci_high > 0.0));
        assert!(c.slope.is_none());
    }

    #[test]
    fn curve_is_nonincreasing_and_slope_negative() {
        let spec = InteractionSpec::LocalPower { r: 3 };
        let lambdas: Vec<f64> = (0..12).map(|i| 0.05 + 0.1 * i as f64).collect();
        let c = tail_probability(1, 4, &spec, 10.0, &lambdas, 5000, SeedPolicy::new(2)).unwrap();
        assert!(c.points.windows(2).all(|w| w[1].count <= w[0].count));
        let s = c.slope.unwrap();
        assert!(s.slope < 0.0 && s.ci_low <= s.slope && s.slope <= s.ci_high);
    }

    #[test]
    fn rejects_unsorted_thresholds() {
        let r = tail_probability(1, 2, &InteractionSpec::LocalPower { r: 3 }, 1.0, &[1.0, 0.5], 10, SeedPolicy::new(0));
        assert!(r.is_err());
    }
}
