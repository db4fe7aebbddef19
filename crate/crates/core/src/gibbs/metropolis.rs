//! Random-walk Metropolis sampler of the local Gibbs measure, used as an
//! independent cross-check of importance sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::cutoff::CutoffSpec;
use super::ensemble::{log_density, SampleRecord, WeightedEnsemble};
use crate::error::{Error, Result};
use crate::fourier_field::{japanese_bracket, sample_free_field, FourierField, SeedPolicy};
use crate::observables::{free_energy, InteractionEvaluator, InteractionSpec};
use crate::stats::{self, McEstimate};
use crate::GIBBS_BETA;

#[derive(Debug, Clone)]
pub struct MetropolisConfig {
    pub d: usize,
    pub n: usize,
    pub interaction: InteractionSpec,
    pub cutoff: CutoffSpec,
    pub steps: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th state after burn-in.
    pub thin: usize,
    /// Proposal û(k) → û(k) + scale·ζ_k/⟨k⟩ with standard complex ζ_k.
    pub proposal_scale: f64,
    pub seed: SeedPolicy,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    pub acceptance_rate: f64,
    pub kept: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MetropolisChain {
    pub ensemble: WeightedEnsemble,
    pub summary: ChainSummary,
}

impl MetropolisChain {
    /// Chain average of f with a batch-means standard error.
    pub fn expectation<F>(&self, f: F) -> Result<McEstimate>
    where
        F: Fn(&FourierField, &SampleRecord) -> Result<f64> + Sync,
    {
        let values = self.ensemble.map(f)?;
        stats::batch_means(&values, 25)
    }
}

/// Log target density in coefficient coordinates: −β h0 + β h^I + ln χ(M).
fn log_target(u: &FourierField, ev: &InteractionEvaluator, cutoff: &CutoffSpec) -> Result<f64> {
    let chi = cutoff.value(ev.wick_mass(u));
    if chi == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_density(GIBBS_BETA * ev.energy(u)?, chi)? - GIBBS_BETA * free_energy(u))
}

pub fn metropolis_chain(config: &MetropolisConfig) -> Result<MetropolisChain> {
    if config.steps == 0 || config.thin == 0 || config.proposal_scale <= 0.0 {
        return Err(Error::InvalidParameter(
            "steps, thin and proposal scale must be positive".into(),
        ));
    }
    let ev = InteractionEvaluator::new(&config.interaction, config.d, config.n)?;
    let start_seed = config.seed.derive(0x5747);
    let mut u = None;
    for i in 0..10_000u64 {
        let v = sample_free_field(config.d, config.n, &start_seed, i)?;
        if log_target(&v, &ev, &config.cutoff)?.is_finite() {
            u = Some(v);
            break;
        }
    }
    let mut u = u.ok_or(Error::DegenerateEnsemble)?;
    let mut lp = log_target(&u, &ev, &config.cutoff)?;
    let scales: Vec<f64> = u
        .iter()
        .map(|(k, _)| config.proposal_scale / japanese_bracket(&k))
        .collect();
    let mut rng = config.seed.rng(u64::MAX);
    let mut accepted = 0usize;
    let mut kept = Vec::new();
    for step in 0..config.burn_in + config.steps {
        let mut prop = u.clone();
        for (c, s) in prop.coeffs_mut().iter_mut().zip(&scales) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *c += Complex64::new(re, im) * (s * std::f64::consts::FRAC_1_SQRT_2);
        }
        let lq = log_target(&prop, &ev, &config.cutoff)?;
        let accept = lq.is_finite() && (lq >= lp || rng.gen::<f64>() < (lq - lp).exp());
        if accept {
            u = prop;
            lp = lq;
        }
        if step >= config.burn_in {
            if accept {
                accepted += 1;
            }
            if (step - config.burn_in) % config.thin == 0 {
                kept.push(u.clone());
            }
        }
    }
    let acceptance_rate = accepted as f64 / config.steps as f64;
    let warning = (!(0.05..=0.9).contains(&acceptance_rate)).then(|| {
        format!("acceptance rate {acceptance_rate:.3} outside [0.05, 0.9]; retune the proposal scale")
    });
    let count = kept.len();
    Ok(MetropolisChain {
        ensemble: WeightedEnsemble::from_fields(kept, &config.interaction, config.cutoff)?,
        summary: ChainSummary {
            acceptance_rate,
            kept: count,
            warning,
        },
    })
}
