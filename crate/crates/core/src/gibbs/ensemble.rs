//! Importance-weighted ensembles of free-field samples.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::fourier_field::{sample_free_field, FourierField, SeedPolicy};
use crate::observables::{free_energy, InteractionEvaluator, InteractionSpec};
use crate::stats::{self, McEstimate};
use crate::GIBBS_BETA;

/// Largest log-weight that still fits in an f64.
pub const MAX_LOG_WEIGHT: f64 = 709.0;

/// Free-field draws reweighted by exp(β h^I)·χ(M).
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub d: usize,
    pub n: usize,
    pub interaction: InteractionSpec,
    pub cutoff: CutoffSpec,
    pub samples: usize,
    pub seed: SeedPolicy,
}

impl EnsembleConfig {
    /// The free measure μ0: no interaction, no cutoff.
    pub fn free(d: usize, n: usize, samples: usize, seed: SeedPolicy) -> Self {
        Self {
            d,
            n,
            interaction: InteractionSpec::Off,
            cutoff: CutoffSpec::none(),
            samples,
            seed,
        }
    }
}

/// Per-sample cached observables. `h_interaction` is NaN when the cutoff
/// vanishes and the interaction was not evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    pub wick_mass: f64,
    pub h0: f64,
    pub h_interaction: f64,
    pub log_weight: f64,
}

impl SampleRecord {
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }

    pub fn is_active(&self) -> bool {
        self.log_weight > f64::NEG_INFINITY
    }
}

#[derive(Debug, Clone)]
enum Source {
    Seeds(SeedPolicy),
    Stored(Vec<FourierField>),
}

#[derive(Debug, Clone)]
pub struct WeightedEnsemble {
    d: usize,
    n: usize,
    cutoff: CutoffSpec,
    evaluator: InteractionEvaluator,
    source: Source,
    records: Vec<SampleRecord>,
}

/// Log of the unnormalized local Gibbs density with respect to μ0.
pub(crate) fn log_density(beta_h: f64, chi: f64) -> Result<f64> {
    if chi <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if beta_h > MAX_LOG_WEIGHT || beta_h.is_nan() {
        return Err(Error::WeightOverflow(beta_h));
    }
    Ok(beta_h + chi.ln())
}

fn record_for(
    u: &FourierField,
    index: u64,
    ev: &InteractionEvaluator,
    cutoff: &CutoffSpec,
    weighted: bool,
) -> Result<SampleRecord> {
    let m = ev.wick_mass(u);
    let chi = cutoff.value(m);
    let h_i = if chi > 0.0 { ev.energy(u)? } else { f64::NAN };
    let log_weight = if weighted {
        log_density(GIBBS_BETA * h_i, chi)?
    } else {
        0.0
    };
    Ok(SampleRecord {
        index,
        wick_mass: m,
        h0: free_energy(u),
        h_interaction: h_i,
        log_weight,
    })
}

impl WeightedEnsemble {
    /// Draws `samples` free fields (sample i uses stream i of the seed) and
    /// weights them. Runs in parallel; the result does not depend on the
    /// number of threads.
    pub fn generate(config: &EnsembleConfig) -> Result<Self> {
        if config.samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "ensemble needs at least 2 samples, got {}",
                config.samples
            )));
        }
        let ev = InteractionEvaluator::new(&config.interaction, config.d, config.n)?;
        let records = (0..config.samples as u64)
            .into_par_iter()
            .map(|i| {
                let u = sample_free_field(config.d, config.n, &config.seed, i)?;
                record_for(&u, i, &ev, &config.cutoff, true)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: config.d,
            n: config.n,
            cutoff: config.cutoff,
            evaluator: ev,
            source: Source::Seeds(config.seed),
            records,
        })
    }

    /// Unit-weight ensemble over explicitly given fields (e.g. a Markov chain).
    pub fn from_fields(
        fields: Vec<FourierField>,
        interaction: &InteractionSpec,
        cutoff: CutoffSpec,
    ) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty field list".into()))?;
        let (d, n) = (first.d(), first.n());
        let ev = InteractionEvaluator::new(interaction, d, n)?;
        let records = fields
            .par_iter()
            .enumerate()
            .map(|(i, u)| record_for(u, i as u64, &ev, &cutoff, false))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            n,
            cutoff,
            evaluator: ev,
            source: Source::Stored(fields),
            records,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cutoff(&self) -> &CutoffSpec {
        &self.cutoff
    }

    pub fn interaction(&self) -> &InteractionSpec {
        self.evaluator.spec()
    }

    pub fn evaluator(&self) -> &InteractionEvaluator {
        &self.evaluator
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn log_weights(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.log_weight).collect()
    }

    /// The field of sample `i`, regenerated from its seed when not stored.
    pub fn field(&self, i: usize) -> Result<FourierField> {
        match &self.source {
            Source::Seeds(seed) => sample_free_field(self.d, self.n, seed, self.records[i].index),
            Source::Stored(fields) => Ok(fields[i].clone()),
        }
    }

    /// Evaluates `f` on every sample with positive weight (in parallel, in
    /// sample order); zero-weight samples get `T::default()`.
    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send + Default,
        F: Fn(&FourierField, &SampleRecord) -> Result<T> + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let rec = &self.records[i];
                if rec.is_active() {
                    f(&self.field(i)?, rec)
                } else {
                    Ok(T::default())
                }
            })
            .collect()
    }

    /// Self-normalized estimate of E_μ[f] from per-sample values.
    pub fn weighted_mean(&self, values: &[f64]) -> Result<McEstimate> {
        stats::self_normalized(&self.log_weights(), values)
    }

    /// E_μ[f] under the (normalized) local Gibbs measure.
    pub fn expectation<F>(&self, f: F) -> Result<McEstimate>
    where
        F: Fn(&FourierField, &SampleRecord) -> Result<f64> + Sync,
    {
        let values = self.map(f)?;
        self.weighted_mean(&values)
    }

    /// Plain mean of the weights, the partition function estimate.
    pub fn partition(&self) -> Result<McEstimate> {
        let w: Vec<f64> = self.records.iter().map(SampleRecord::weight).collect();
        let est = stats::mean_estimate(&w)?;
        if est.value <= 0.0 {
            return Err(Error::DegenerateEnsemble);
        }
        let sw: f64 = w.iter().sum();
        let sw2: f64 = w.iter().map(|x| x * x).sum();
        Ok(McEstimate {
            n_effective: sw * sw / sw2,
            ..est
        })
    }

    /// SHA-256 over all sample coefficients in index order.
    pub fn digest(&self) -> Result<[u8; 32]> {
        let mut hasher = Sha256::new();
        for i in 0..self.len() {
            let u = self.field(i)?;
            hasher.update(u.digest());
        }
        Ok(hasher.finalize().into())
    }
}

/// exp(β h^I(u)) · χ(M(u)).
pub fn gibbs_weight(u: &FourierField, interaction: &InteractionSpec, cutoff: &CutoffSpec) -> Result<f64> {
    let ev = InteractionEvaluator::new(interaction, u.d(), u.n())?;
    let chi = cutoff.value(ev.wick_mass(u));
    if chi == 0.0 {
        return Ok(0.0);
    }
    Ok(log_density(GIBBS_BETA * ev.energy(u)?, chi)?.exp())
}

/// z = E_μ0[exp(β h^I) χ(M)] from `samples` free draws.
pub fn estimate_partition(
    d: usize,
    n: usize,
    interaction: &InteractionSpec,
    cutoff: &CutoffSpec,
    samples: usize,
    seed: SeedPolicy,
) -> Result<McEstimate> {
    WeightedEnsemble::generate(&EnsembleConfig {
        d,
        n,
        interaction: interaction.clone(),
        cutoff: *cutoff,
        samples,
        seed,
    })?
    .partition()
}

/// E_μ[f] over an ensemble.
pub fn expectation<F>(observable: F, ensemble: &WeightedEnsemble) -> Result<McEstimate>
where
    F: Fn(&FourierField, &SampleRecord) -> Result<f64> + Sync,
{
    ensemble.expectation(observable)
}
