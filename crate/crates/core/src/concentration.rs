//! Hoeffding, Bernstein and Hanson–Wright tail bounds in computable form, and
//! their comparison with sampled tails.
//!
//! The universal constants c of the inequalities are not known; every bound
//! takes c as a parameter and [`empirical_tail_vs_bound`] reports the largest
//! c for which the bound dominates the sampled tail.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier_field::{check_dim, SeedPolicy};
use crate::stats::{wilson_interval, McEstimate};

const FOUR_PI_SQ: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Minimum sample count for an Orlicz norm estimate.
pub const MIN_ORLICZ_SAMPLES: usize = 1000;

/// Default largest moment used for Orlicz norms.
pub const DEFAULT_MAX_MOMENT: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrliczKind {
    /// sup_p p^{−1/2} (E|X|^p)^{1/p}
    Psi2,
    /// sup_p p^{−1} (E|X|^p)^{1/p}
    Psi1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczEstimate {
    pub kind: OrliczKind,
    pub value: f64,
    /// Moment at which the maximum is attained.
    pub argmax_p: u32,
    pub max_moment: u32,
}

/// Empirical Orlicz norm: the maximum over p = 1..=P of the normalized p-th
/// sample moment.
pub fn orlicz_norm(samples: &[f64], kind: OrliczKind, max_moment: u32) -> Result<OrliczEstimate> {
    if samples.len() < MIN_ORLICZ_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "an Orlicz norm estimate needs at least {MIN_ORLICZ_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if max_moment == 0 {
        return Err(Error::InvalidParameter("largest moment must be at least 1".into()));
    }
    let scale = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut best = OrliczEstimate {
        kind,
        value: 0.0,
        argmax_p: 1,
        max_moment,
    };
    if scale == 0.0 {
        return Ok(best);
    }
    let n = samples.len() as f64;
    for p in 1..=max_moment {
        // moments of X/scale stay in range
        let m = samples.iter().map(|x| (x.abs() / scale).powi(p as i32)).sum::<f64>() / n;
        let norm = scale * m.powf(1.0 / p as f64);
        let weight = match kind {
            OrliczKind::Psi2 => (p as f64).sqrt(),
            OrliczKind::Psi1 => p as f64,
        };
        let v = norm / weight;
        if v > best.value {
            best.value = v;
            best.argmax_p = p;
        }
    }
    Ok(best)
}

/// exp(−c E(ρ)) for the three inequalities; E is the exponent per unit c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "inequality")]
pub enum TailBound {
    /// E = ρ²/(M²‖a‖₂²)
    Hoeffding { a_l2_sq: f64, psi2: f64 },
    /// E = min(ρ²/(Ξ²‖a‖₂²), ρ/(Ξ‖a‖_∞))
    Bernstein { a_l2_sq: f64, a_linf: f64, psi1: f64 },
    /// E = min(ρ²/(Ξ⁴‖A‖²_HS), ρ/(Ξ‖A‖))
    HansonWright { hs_sq: f64, op: f64, psi2: f64 },
}

impl TailBound {
    pub fn hoeffding(a: &[f64], psi2: f64) -> Result<Self> {
        let a_l2_sq = l2_sq(a);
        positive("‖a‖₂", a_l2_sq)?;
        Ok(Self::Hoeffding { a_l2_sq, psi2 })
    }

    pub fn bernstein(a: &[f64], psi1: f64) -> Result<Self> {
        let a_l2_sq = l2_sq(a);
        positive("‖a‖₂", a_l2_sq)?;
        Ok(Self::Bernstein {
            a_l2_sq,
            a_linf: linf(a),
            psi1,
        })
    }

    pub fn exponent(&self, rho: f64) -> f64 {
        match *self {
            Self::Hoeffding { a_l2_sq, psi2 } => rho * rho / (psi2 * psi2 * a_l2_sq),
            Self::Bernstein { a_l2_sq, a_linf, psi1 } => {
                (rho * rho / (psi1 * psi1 * a_l2_sq)).min(rho / (psi1 * a_linf))
            }
            Self::HansonWright { hs_sq, op, psi2 } => (rho * rho / (psi2.powi(4) * hs_sq)).min(rho / (psi2 * op)),
        }
    }

    pub fn value(&self, rho: f64, c: f64) -> f64 {
        (-c * self.exponent(rho)).exp()
    }
}

fn l2_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn linf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("threshold must be nonnegative, got {rho}")))
    }
}

/// exp(−cρ²/(M²‖a‖₂²)).
pub fn hoeffding_bound(a: &[f64], psi2: f64, rho: f64, c: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(TailBound::hoeffding(a, psi2)?.value(rho, c))
}

/// exp(−c min(ρ²/(Ξ²‖a‖₂²), ρ/(Ξ‖a‖_∞))).
pub fn bernstein_bound(a: &[f64], psi1: f64, rho: f64, c: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(TailBound::bernstein(a, psi1)?.value(rho, c))
}

/// exp(−c min(ρ²/(Ξ⁴‖A‖²_HS), ρ/(Ξ‖A‖))).
pub fn hanson_wright_bound(hs_sq: f64, op: f64, psi2: f64, rho: f64, c: f64) -> Result<f64> {
    check_rho(rho)?;
    positive("‖A‖_HS", hs_sq)?;
    positive("‖A‖", op)?;
    Ok(TailBound::HansonWright { hs_sq, op, psi2 }.value(rho, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub threshold: f64,
    /// Fraction of samples with |S| > threshold.
    pub empirical: f64,
    pub count: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurve {
    pub rows: Vec<TailRow>,
    pub bound: TailBound,
    /// Largest c with bound ≥ empirical at every threshold used in the fit.
    pub fitted_c: f64,
    pub samples: usize,
}

impl TailCurve {
    /// True when the bound with the fitted c dominates every row with
    /// 0 < empirical < 1.
    pub fn dominated(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.empirical < 1.0)
            .all(|r| r.bound >= r.empirical * (1.0 - 1e-12))
    }
}

/// Empirical tail P(|S| > ρ) at each threshold against exp(−c E(ρ)), with c
/// fitted as large as possible subject to domination. Rows where every sample
/// exceeds the threshold (or none does) carry no tail information and do not
/// constrain the fit.
pub fn empirical_tail_vs_bound(values: &[f64], bound: TailBound, thresholds: &[f64]) -> Result<TailCurve> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut ts = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);
    let n = sorted.len() as u64;
    let mut fitted_c = f64::INFINITY;
    let mut rows: Vec<TailRow> = ts
        .iter()
        .map(|&t| {
            check_rho(t)?;
            let below = sorted.partition_point(|v| *v <= t) as u64;
            let count = n - below;
            let p = count as f64 / n as f64;
            let (ci_low, ci_high) = wilson_interval(count, n, 0.95);
            let e = bound.exponent(t);
            if count > 0 && count < n && e > 0.0 {
                fitted_c = fitted_c.min(-p.ln() / e);
            }
            Ok(TailRow {
                threshold: t,
                empirical: p,
                count,
                ci_low,
                ci_high,
                bound: 0.0,
            })
        })
        .collect::<Result<_>>()?;
    if !fitted_c.is_finite() {
        fitted_c = 0.0;
    }
    for r in &mut rows {
        r.bound = bound.value(r.threshold, fitted_c);
    }
    Ok(TailCurve {
        rows,
        bound,
        fitted_c,
        samples: values.len(),
    })
}

/// S = Σ_k a_k (|g_k|² − 1) with a_k = ⟨k⟩⁻² over a finite mode set, sampled
/// exactly by grouping modes of equal |k|²: a sum of m independent Exp(1)
/// variables is Gamma(m, 1).
#[derive(Debug, Clone)]
pub struct RadialQuadraticSum {
    /// (a, multiplicity) per distinct |k|².
    shells: Vec<(f64, u32)>,
    draws: Vec<Gamma<f64>>,
}

impl RadialQuadraticSum {
    fn from_counts(counts: BTreeMap<u64, u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("empty mode set".into()));
        }
        let shells: Vec<(f64, u32)> = counts
            .into_iter()
            .map(|(r2, m)| (1.0 / (FOUR_PI_SQ * r2 as f64 + 1.0), m))
            .collect();
        let draws = shells
            .iter()
            .map(|&(_, m)| Gamma::new(m as f64, 1.0).expect("positive shape"))
            .collect();
        Ok(Self { shells, draws })
    }

    /// Modes with inner < |k| ≤ outer (Euclidean norm).
    pub fn shell(d: usize, inner: f64, outer: f64) -> Result<Self> {
        check_dim(d)?;
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::InvalidParameter(format!("need 0 ≤ inner < outer, got {inner}, {outer}")));
        }
        let r = outer.floor() as i64;
        let mut counts = BTreeMap::new();
        for_each_in_cube(d, r, |r2| {
            let norm = (r2 as f64).sqrt();
            if norm > inner && norm <= outer {
                *counts.entry(r2).or_insert(0u32) += 1;
            }
        });
        Self::from_counts(counts)
    }

    /// All modes of the truncation |k|_∞ ≤ n; S is then the Wick mass of a
    /// free-field sample.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        check_dim(d)?;
        let mut counts = BTreeMap::new();
        for_each_in_cube(d, n as i64, |r2| *counts.entry(r2).or_insert(0u32) += 1);
        Self::from_counts(counts)
    }

    /// Number of modes.
    pub fn modes(&self) -> u64 {
        self.shells.iter().map(|s| s.1 as u64).sum()
    }

    /// The coefficient sequence a_k, one entry per mode.
    pub fn coefficients(&self) -> Vec<f64> {
        self.shells
            .iter()
            .flat_map(|&(a, m)| std::iter::repeat(a).take(m as usize))
            .collect()
    }

    /// ‖a‖₂² = Σ⟨k⟩⁻⁴, also the exact variance of S.
    pub fn l2_sq(&self) -> f64 {
        self.shells.iter().map(|&(a, m)| a * a * m as f64).sum()
    }

    pub fn linf(&self) -> f64 {
        self.shells.iter().map(|s| s.0).fold(0.0, f64::max)
    }

    pub fn variance(&self) -> f64 {
        self.l2_sq()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.shells
            .iter()
            .zip(&self.draws)
            .map(|(&(a, m), g)| a * (g.sample(rng) - m as f64))
            .sum()
    }

    /// Samples 0..count of the seed's streams, in parallel.
    pub fn sample_many(&self, seed: &SeedPolicy, count: usize) -> Vec<f64> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample(&mut seed.rng(i)))
            .collect()
    }
}

fn for_each_in_cube(d: usize, r: i64, mut f: impl FnMut(u64)) {
    let sq = |x: i64| (x * x) as u64;
    match d {
        1 => (-r..=r).for_each(|a| f(sq(a))),
        2 => (-r..=r).for_each(|a| (-r..=r).for_each(|b| f(sq(a) + sq(b)))),
        _ => (-r..=r).for_each(|a| {
            (-r..=r).for_each(|b| (-r..=r).for_each(|c| f(sq(a) + sq(b) + sq(c))))
        }),
    }
}

/// Leading-order Σ_{|k|>M} ⟨k⟩⁻⁴ from the continuum integral:
/// 1/(16π³M²) for d = 2 and 1/(4π³M) for d = 3.
pub fn shell_l2_asymptotic(d: usize, m: f64) -> Result<f64> {
    let pi3 = std::f64::consts::PI.powi(3);
    match d {
        2 => Ok(1.0 / (16.0 * pi3 * m * m)),
        3 => Ok(1.0 / (4.0 * pi3 * m)),
        _ => Err(Error::InvalidParameter(format!("shell asymptotics are for d = 2, 3, got {d}"))),
    }
}

/// Σ_{|k|>M} ⟨k⟩⁻⁴ summed directly up to |k| ≤ L, plus the continuum tail
/// beyond L.
pub fn shell_l2_direct(d: usize, m: f64, l: f64) -> Result<f64> {
    Ok(RadialQuadraticSum::shell(d, m, l)?.l2_sq() + shell_l2_asymptotic(d, l)?)
}

/// Sample variance with the standard error sqrt((m4 − s⁴)/N).
pub fn variance_estimate(values: &[f64]) -> Result<McEstimate> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 samples, got {n}")));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    Ok(McEstimate {
        value: m2 * nf / (nf - 1.0),
        std_error: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        n_effective: nf,
        n_samples: n,
    })
}

/// The decoupled off-diagonal block A_{ij} = δ_{i,j−k} / (⟨j⟩⟨j−k⟩) over
/// K/2 ≤ |j| < K with |j| ≥ |j − k|, for a fixed nonzero shift k.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrix {
    k: [i64; 3],
    d: usize,
    /// (j, A entry) for every nonzero column j.
    entries: Vec<([i64; 3], f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixNorms {
    pub k_scale: f64,
    pub operator: f64,
    pub hs_sq: f64,
    /// sqrt(A_row · A_col), the Schur bound on the operator norm.
    pub schur_bound: f64,
    pub nonzeros: usize,
}

fn bracket_sq(v: &[i64; 3]) -> f64 {
    FOUR_PI_SQ * v.iter().map(|x| (x * x) as f64).sum::<f64>() + 1.0
}

impl ShiftMatrix {
    pub fn new(d: usize, big_k: f64, k: &[i64]) -> Result<Self> {
        check_dim(d)?;
        if k.len() != d || k.iter().all(|&x| x == 0) {
            return Err(Error::InvalidParameter("shift must be a nonzero vector of length d".into()));
        }
        if !(big_k >= 2.0) {
            return Err(Error::InvalidParameter(format!("K must be at least 2, got {big_k}")));
        }
        let mut kk = [0i64; 3];
        kk[..d].copy_from_slice(k);
        let r = big_k.ceil() as i64;
        let norm = |v: &[i64; 3]| v.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt();
        let mut entries = Vec::new();
        let range = |axis: usize| if axis < d { -r..=r } else { 0..=0 };
        for a in range(0) {
            for b in range(1) {
                for c in range(2) {
                    let j = [a, b, c];
                    let shifted = [a - kk[0], b - kk[1], c - kk[2]];
                    let nj = norm(&j);
                    if nj >= big_k / 2.0 && nj < big_k && nj >= norm(&shifted) {
                        entries.push((j, 1.0 / (bracket_sq(&j) * bracket_sq(&shifted)).sqrt()));
                    }
                }
            }
        }
        Ok(Self { k: kk, d, entries })
    }

    pub fn norms(&self, big_k: f64) -> MatrixNorms {
        // one entry per row and per column: a weighted partial permutation
        let max = self.entries.iter().map(|e| e.1).fold(0.0, f64::max);
        MatrixNorms {
            k_scale: big_k,
            operator: max,
            hs_sq: self.entries.iter().map(|e| e.1 * e.1).sum(),
            schur_bound: max,
            nonzeros: self.entries.len(),
        }
    }

    /// The bilinear form Σ_j A g_j conj(g_{j−k}) for Gaussians given by a
    /// lookup of the needed modes.
    pub fn form(&self, g: impl Fn(&[i64; 3]) -> Complex64) -> Complex64 {
        self.entries
            .iter()
            .map(|(j, a)| {
                let s = [j[0] - self.k[0], j[1] - self.k[1], j[2] - self.k[2]];
                g(j) * g(&s).conj() * a
            })
            .sum()
    }

    /// Every index the form reads.
    pub fn support(&self) -> Vec<[i64; 3]> {
        let mut idx: Vec<[i64; 3]> = self
            .entries
            .iter()
            .flat_map(|(j, _)| [*j, [j[0] - self.k[0], j[1] - self.k[1], j[2] - self.k[2]]])
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Samples of |Σ_j A g_j conj(g_{j−k})| with independent standard complex
    /// Gaussians.
    pub fn sample_many(&self, seed: &SeedPolicy, count: usize) -> Vec<f64> {
        let support = self.support();
        (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed.rng(i);
                let values: Vec<Complex64> = support.iter().map(|_| complex_gaussian(&mut rng)).collect();
                self.form(|j| {
                    let pos = support.binary_search(j).expect("index in support");
                    values[pos]
                })
                .norm()
            })
            .collect()
    }
}

/// Standard complex Gaussian, E|g|² = 1.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
}

/// Samples of |Σ a_ℓ g_ℓ| with independent standard complex Gaussians g_ℓ.
pub fn linear_form_samples(a: &[f64], seed: &SeedPolicy, count: usize) -> Vec<f64> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            a.iter().map(|a| complex_gaussian(&mut rng) * a).sum::<Complex64>().norm()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub d: usize,
    pub n: usize,
    pub radius: f64,
    /// Fraction of samples with |M| ≤ R.
    pub estimate: McEstimate,
    pub successes: u64,
    /// 99% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub positive: bool,
}

/// Confidence level of the positivity check.
pub const POSITIVITY_CONFIDENCE: f64 = 0.99;

/// μ0(|M| ≤ R) for each radius, from one set of N Wick-mass draws at
/// truncation n (so the estimates are nondecreasing in R).
pub fn partition_positivity_check(
    d: usize,
    radii: &[f64],
    samples: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<PositivityReport>> {
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("positivity is checked for d = 2, 3, got {d}")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let law = RadialQuadraticSum::cube(d, n)?;
    let masses = law.sample_many(&SeedPolicy::new(seed).derive(0x706f_7369), samples);
    radii
        .iter()
        .map(|&r| {
            positive("R", r)?;
            let successes = masses.iter().filter(|m| m.abs() <= r).count() as u64;
            let p = successes as f64 / samples as f64;
            let (ci_low, ci_high) = wilson_interval(successes, samples as u64, POSITIVITY_CONFIDENCE);
            Ok(PositivityReport {
                d,
                n,
                radius: r,
                estimate: McEstimate {
                    value: p,
                    std_error: (p * (1.0 - p) / samples as f64).sqrt(),
                    n_effective: samples as f64,
                    n_samples: samples,
                },
                successes,
                ci_low,
                ci_high,
                positive: ci_low > 0.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_field::sample_free_field;
    use crate::observables::{sigma4_n, wick_mass};
    use proptest::prelude::{prop_assert, proptest};

    #[test]
    fn orlicz_examples() {
        let zero = vec![0.0; 1000];
        assert_eq!(orlicz_norm(&zero, OrliczKind::Psi2, 12).unwrap().value, 0.0);
        assert!(orlicz_norm(&[1.0; 10], OrliczKind::Psi1, 12).is_err());
        // ψ2 of a standard normal is attained at p = 1: E|X| = sqrt(2/π)
        let seed = SeedPolicy::new(5);
        let x: Vec<f64> = (0..100_000u64).map(|i| seed.rng(i).sample(StandardNormal)).collect();
        let e = orlicz_norm(&x, OrliczKind::Psi2, 12).unwrap();
        assert_eq!(e.argmax_p, 1);
        assert!((e.value - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.006, "{e:?}");
        // ψ1 of |g|² − 1: E||g|² − 1| = 2/e, flat in P
        let y: Vec<f64> = (0..100_000u64)
            .map(|i| complex_gaussian(&mut seed.rng(1_000_000 + i)).norm_sqr() - 1.0)
            .collect();
        let p8 = orlicz_norm(&y, OrliczKind::Psi1, 8).unwrap();
        let p12 = orlicz_norm(&y, OrliczKind::Psi1, 12).unwrap();
        assert_eq!(p8.value, p12.value);
        assert!((p8.value - 2.0 / std::f64::consts::E).abs() < 0.01, "{p8:?}");
    }

    #[test]
    fn bound_examples() {
        let a = [0.5, 0.25, 0.1];
        assert_eq!(hoeffding_bound(&a, 1.0, 0.0, 0.7).unwrap(), 1.0);
        assert_eq!(bernstein_bound(&a, 1.0, 0.0, 0.7).unwrap(), 1.0);
        assert_eq!(hanson_wright_bound(0.1, 0.05, 1.0, 0.0, 0.7).unwrap(), 1.0);
        let b = TailBound::hoeffding(&a, 1.3).unwrap();
        assert!((b.exponent(2.0) / b.exponent(1.0) - 4.0).abs() < 1e-14);
        // linear branch once ρ > Ξ‖a‖₂²/‖a‖_∞
        let b = TailBound::bernstein(&a, 1.0).unwrap();
        let switch = l2_sq(&a) / linf(&a);
        assert!((b.exponent(3.0 * switch) / b.exponent(6.0 * switch) - 0.5).abs() < 1e-14);
        assert!((b.exponent(0.1 * switch) / b.exponent(0.2 * switch) - 0.25).abs() < 1e-14);
        assert!(hoeffding_bound(&[0.0], 1.0, 1.0, 1.0).is_err());
        assert!(bernstein_bound(&a, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn shell_norm_matches_continuum() {
        for m in [16.0, 24.0, 32.0] {
            let direct = shell_l2_direct(3, m, 4.0 * m).unwrap();
            let asym = shell_l2_asymptotic(3, m).unwrap();
            assert!((direct / asym - 1.0).abs() < 0.2, "M={m}: {direct} vs {asym}");
        }
        let s = RadialQuadraticSum::shell(3, 16.0, 64.0).unwrap();
        // smallest |k|² above 16² is 257 = 16² + 1²
        let expected = 1.0 / (FOUR_PI_SQ * 257.0 + 1.0);
        assert!((s.linf() - expected).abs() < 1e-18);
    }

    #[test]
    fn grouped_law_matches_field_sampler() {
        let law = RadialQuadraticSum::cube(2, 4).unwrap();
        assert_eq!(law.modes(), 81);
        assert!((law.variance() - sigma4_n(2, 4).unwrap()).abs() < 1e-14);
        let seed = SeedPolicy::new(9);
        let a = law.sample_many(&seed, 40_000);
        let b: Vec<f64> = (0..40_000u64)
            .map(|i| wick_mass(&sample_free_field(2, 4, &seed, i).unwrap()))
            .collect();
        let (va, vb) = (variance_estimate(&a).unwrap(), variance_estimate(&b).unwrap());
        assert!(crate::stats::combined_z(&va, &vb).abs() < 4.0);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean(&a) - mean(&b)).abs() < 4.0 * (2.0 * va.value / 40_000.0).sqrt());
    }

    #[test]
    fn tail_curve_examples() {
        let values: Vec<f64> = (1..=1000).map(|i| i as f64 / 1000.0).collect();
        let bound = TailBound::hoeffding(&[0.3], 1.0).unwrap();
        let curve = empirical_tail_vs_bound(&values, bound, &[0.5, 0.0001, 0.9]).unwrap();
        assert_eq!(curve.rows[0].empirical, 1.0);
        assert!(curve.rows.windows(2).all(|w| w[0].empirical >= w[1].empirical));
        assert!(curve.fitted_c > 0.0);
        assert!(curve.dominated());
    }

    #[test]
    fn shift_matrix_structure() {
        let m = ShiftMatrix::new(3, 8.0, &[1, 0, 0]).unwrap();
        let norms = m.norms(8.0);
        assert!(norms.operator <= norms.schur_bound);
        assert!(norms.hs_sq <= norms.nonzeros as f64 * norms.operator.powi(2));
        // the form only couples j with j − k
        let f = m.form(|j| if j[0] % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        assert_eq!(f, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn positivity_examples() {
        let reps = partition_positivity_check(2, &[0.5, 1.0, 100.0], 2000, 8, 1).unwrap();
        assert!(reps.windows(2).all(|w| w[0].successes <= w[1].successes));
        assert_eq!(reps[2].estimate.value, 1.0);
        assert!(reps.iter().all(|r| r.positive));
        assert!(partition_positivity_check(1, &[1.0], 100, 4, 1).is_err());
    }

    proptest! {
        #[test]
        fn bounds_are_nonincreasing(r1 in 0.0f64..10.0, dr in 0.0f64..10.0, c in 0.01f64..5.0) {
            let a = [0.4, 0.2, 0.05];
            for b in [
                TailBound::hoeffding(&a, 0.9).unwrap(),
                TailBound::bernstein(&a, 1.1).unwrap(),
                TailBound::HansonWright { hs_sq: 0.02, op: 0.01, psi2: 0.9 },
            ] {
                prop_assert!(b.value(r1 + dr, c) <= b.value(r1, c));
                prop_assert!(b.value(r1, c) <= 1.0);
            }
        }
    }
}
