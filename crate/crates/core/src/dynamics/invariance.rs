//! Monte-Carlo test of E_μ[f ∘ Φ_T] = E_μ[f].

use std::sync::Arc;

use serde::Serialize;

use super::{evolve_with, FlowConfig, Propagator};
use crate::error::{Error, Result};
use crate::fourier_field::{FourierField, LatticeIndex};
use crate::gibbs::{transition, EnsembleConfig, WeightedEnsemble};
use crate::observables::InteractionEvaluator;
use crate::stats::McEstimate;

/// Relative floor on the paired standard error: differences at the level of
/// floating-point rounding are not evidence against invariance.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

type ObservableFn = dyn Fn(&FourierField, &InteractionEvaluator) -> Result<f64> + Send + Sync;

/// A bounded observable of the field with a report name.
#[derive(Clone)]
pub struct NamedObservable {
    pub name: String,
    f: Arc<ObservableFn>,
}

impl std::fmt::Debug for NamedObservable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NamedObservable").field("name", &self.name).finish()
    }
}

impl NamedObservable {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&FourierField, &InteractionEvaluator) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, u: &FourierField, ev: &InteractionEvaluator) -> Result<f64> {
        (self.f)(u, ev)
    }

    /// Smooth step from 1 (M ≤ m − w/2) to 0 (M ≥ m + w/2).
    pub fn smoothed_mass_indicator(threshold: f64, width: f64) -> Self {
        Self::new(format!("mass_below_{threshold}"), move |u, ev| {
            Ok(transition((threshold - ev.wick_mass(u)) / width + 0.5))
        })
    }

    /// exp(−(Re û(k) − c)²/(2w²)).
    pub fn mode_bump(k: LatticeIndex, center: f64, width: f64) -> Self {
        Self::new(format!("re_mode_{k}_bump"), move |u, _| {
            let x = (u.get(&k).re - center) / width;
            Ok((-0.5 * x * x).exp())
        })
    }

    /// h^I clamped to [−cap, cap].
    pub fn clipped_interaction(cap: f64) -> Self {
        Self::new(format!("h_interaction_clipped_{cap}"), move |u, ev| {
            Ok(ev.energy(u)?.clamp(-cap, cap))
        })
    }

    /// The default observable set for dimension d.
    pub fn shipped(d: usize) -> Result<Vec<Self>> {
        let mut e1 = vec![0; d];
        e1[0] = 1;
        Ok(vec![
            Self::smoothed_mass_indicator(1.5, 1.0),
            Self::mode_bump(LatticeIndex::zero(d)?, 0.5, 0.5),
            Self::mode_bump(LatticeIndex::new(&e1)?, 0.05, 0.1),
            Self::clipped_interaction(2.0),
        ])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceEntry {
    pub name: String,
    pub before: McEstimate,
    pub after: McEstimate,
    /// Paired estimate of E[f(Φ_T u) − f(u)].
    pub difference: McEstimate,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub entries: Vec<InvarianceEntry>,
    /// Largest relative energy drift over the evolved samples.
    pub max_drift_h: f64,
    pub n_effective: f64,
}

/// For each observable, estimates E_μ[f(u)] and E_μ[f(Φ_T u)] on the same
/// weighted samples; z is the paired difference over its standard error.
pub fn invariance_test(
    ensemble: &EnsembleConfig,
    flow: &FlowConfig,
    observables: &[NamedObservable],
) -> Result<InvarianceReport> {
    if flow.interaction != ensemble.interaction {
        return Err(Error::InvalidParameter(
            "flow and ensemble must use the same interaction".into(),
        ));
    }
    let ens = WeightedEnsemble::generate(ensemble)?;
    let prop = Propagator::new(&flow.interaction, ensemble.d, ensemble.n)?;
    let cfg = FlowConfig {
        checkpoint_every: usize::MAX,
        ..flow.clone()
    };
    let ev = prop.evaluator();
    let rows: Vec<(Vec<(f64, f64)>, f64)> = ens.map(|u, _| {
        let traj = evolve_with(&prop, u, &cfg)?;
        let pairs = observables
            .iter()
            .map(|o| Ok((o.eval(u, ev)?, o.eval(&traj.field, ev)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((pairs, traj.report.max_drift_h))
    })?;
    let max_drift_h = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let column = |j: usize, pick: &dyn Fn((f64, f64)) -> f64| -> Vec<f64> {
        rows.iter()
            .map(|(pairs, _)| pairs.get(j).copied().map_or(0.0, pick))
            .collect()
    };
    let mut entries = Vec::with_capacity(observables.len());
    for (j, o) in observables.iter().enumerate() {
        let before = ens.weighted_mean(&column(j, &|p| p.0))?;
        let after = ens.weighted_mean(&column(j, &|p| p.1))?;
        let mut difference = ens.weighted_mean(&column(j, &|p| p.1 - p.0))?;
        let floor = ROUNDOFF_FLOOR * (before.value.abs() + after.value.abs());
        difference.std_error = difference.std_error.max(floor);
        entries.push(InvarianceEntry {
            name: o.name.clone(),
            before,
            after,
            z: difference.z(),
            difference,
        });
    }
    let n_effective = entries.first().map_or(0.0, |e| e.before.n_effective);
    Ok(InvarianceReport {
        entries,
        max_drift_h,
        n_effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_field::SeedPolicy;
    use crate::gibbs::CutoffSpec;
    use crate::observables::InteractionSpec;

    #[test]
    fn zero_time_gives_zero_z() {
        let ens = EnsembleConfig {
            d: 1,
            n: 3,
            interaction: InteractionSpec::LocalPower { r: 3 },
            cutoff: CutoffSpec::smooth(5.0, 0.9).unwrap(),
            samples: 200,
            seed: SeedPolicy::new(1),
        };
        let flow = FlowConfig::new(InteractionSpec::LocalPower { r: 3 }, 0.0, 0.01);
        let rep = invariance_test(&ens, &flow, &NamedObservable::shipped(1).unwrap()).unwrap();
        for e in &rep.entries {
            assert_eq!(e.z, 0.0);
            assert_eq!(e.before.value, e.after.value);
        }
    }

    #[test]
    fn free_flow_keeps_moduli() {
        let k = LatticeIndex::new(&[1, 0]).unwrap();
        let obs = vec![NamedObservable::new("abs2", move |u, _| Ok(u.get(&k).norm_sqr()))];
        let ens = EnsembleConfig::free(2, 2, 500, SeedPolicy::new(3));
        let flow = FlowConfig::new(InteractionSpec::Off, 0.5, 0.05);
        let rep = invariance_test(&ens, &flow, &obs).unwrap();
        assert!(rep.entries[0].z.abs() < 3.0);
        assert!(rep.entries[0].difference.value.abs() < 1e-12);
    }
}
