//! Truncated local Gibbs measures
//! dμ = z⁻¹ exp(β h^I(u)) χ^(δ)_R(M(u)) dμ0(u), realized by importance sampling
//! over free-field draws, with a Metropolis sampler as cross-check.

mod cutoff;
mod ensemble;
mod metropolis;
mod tail;

pub use crate::stats::McEstimate;
pub use cutoff::{cutoff_value, transition, CutoffShape, CutoffSpec};
pub use ensemble::{
    estimate_partition, expectation, gibbs_weight, EnsembleConfig, SampleRecord, WeightedEnsemble,
    MAX_LOG_WEIGHT,
};
pub use metropolis::{metropolis_chain, ChainSummary, MetropolisChain, MetropolisConfig};
pub use tail::{
    interaction_draws, tail_from_draws, tail_probability, SlopeFit, TailPoint, TailProbabilityCurve,
    MIN_FIT_COUNT,
};
