//! The truncated Hamiltonian flow, conservation monitoring and measure
//! invariance testing.

mod flow;
mod invariance;

pub use flow::{vector_field, FlowConfig, Integrator, Propagator};
pub use invariance::{invariance_test, InvarianceEntry, InvarianceReport, NamedObservable, ROUNDOFF_FLOOR};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier_field::FourierField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    /// Truncated Hamiltonian h_n = h0 − h^I.
    pub h: f64,
    /// Truncated (Wick) mass.
    pub mass: f64,
    /// |h(t) − h(0)| / |h(0)|.
    pub drift_h: f64,
    /// |M(t) − M(0)| / ‖u(0)‖²; equals the relative mass drift for d = 1.
    pub drift_mass: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TrajectoryReport {
    pub checkpoints: Vec<Checkpoint>,
    pub max_drift_h: f64,
    pub max_drift_mass: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub field: FourierField,
    pub report: TrajectoryReport,
}

/// The flow left the finite range. Carries the last checkpoint that was still
/// finite.
#[derive(Debug, Clone)]
pub struct FlowAbort {
    pub time: f64,
    pub last_stable: FourierField,
    pub last_stable_time: f64,
    pub report: TrajectoryReport,
}

#[derive(Debug, Clone)]
pub enum FlowFailure {
    Invalid(Error),
    Unstable(Box<FlowAbort>),
}

impl From<Error> for FlowFailure {
    fn from(e: Error) -> Self {
        Self::Invalid(e)
    }
}

impl From<FlowFailure> for Error {
    fn from(f: FlowFailure) -> Self {
        match f {
            FlowFailure::Invalid(e) => e,
            FlowFailure::Unstable(a) => Error::Unstable { time: a.time },
        }
    }
}

impl std::fmt::Display for FlowFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        Error::from(self.clone()).fmt(f)
    }
}

impl std::error::Error for FlowFailure {}

fn is_finite(u: &FourierField) -> bool {
    u.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Integrates from u0 over [0, T] (or [T, 0] for T < 0).
pub fn evolve(u0: &FourierField, config: &FlowConfig) -> std::result::Result<Trajectory, FlowFailure> {
    let prop = Propagator::new(&config.interaction, u0.d(), u0.n())?;
    evolve_with(&prop, u0, config)
}

/// [`evolve`] with a prebuilt propagator.
pub fn evolve_with(
    prop: &Propagator,
    u0: &FourierField,
    config: &FlowConfig,
) -> std::result::Result<Trajectory, FlowFailure> {
    let steps = config.steps()?;
    let h = config.dt.copysign(config.t_final);
    let ev = prop.evaluator();
    let h_start = prop.hamiltonian(u0)?;
    let m_start = ev.wick_mass(u0);
    let h_scale = if h_start != 0.0 { h_start.abs() } else { 1.0 };
    let m_scale = if u0.norm_sq() > 0.0 { u0.norm_sq() } else { 1.0 };
    let every = config.checkpoint_every.max(1);

    let mut report = TrajectoryReport::default();
    let record = |t: f64, u: &FourierField, report: &mut TrajectoryReport| -> Result<()> {
        let hv = prop.hamiltonian(u)?;
        let mv = ev.wick_mass(u);
        let cp = Checkpoint {
            t,
            h: hv,
            mass: mv,
            drift_h: (hv - h_start).abs() / h_scale,
            drift_mass: (mv - m_start).abs() / m_scale,
        };
        report.max_drift_h = report.max_drift_h.max(cp.drift_h);
        report.max_drift_mass = report.max_drift_mass.max(cp.drift_mass);
        report.checkpoints.push(cp);
        Ok(())
    };
    record(0.0, u0, &mut report)?;
    let mut u = u0.clone();
    let mut stable = (u0.clone(), 0.0);
    for s in 1..=steps {
        u = prop.step(&u, h, config.integrator)?;
        let t = s as f64 * h;
        if !is_finite(&u) {
            return Err(FlowFailure::Unstable(Box::new(FlowAbort {
                time: t,
                last_stable: stable.0,
                last_stable_time: stable.1,
                report,
            })));
        }
        if s % every == 0 || s == steps {
            record(t, &u, &mut report)?;
            stable = (u.clone(), t);
        }
    }
    Ok(Trajectory { field: u, report })
}
