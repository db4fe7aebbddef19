//! Integrators for u̇ = −iAu + i∇h^I(u) on the truncated mode set.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier_field::{FourierField, SpectralMultiplier};
use crate::observables::{free_energy, InteractionEvaluator, InteractionSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Integrating-factor (Lawson) RK4 on the interaction representation.
    IfRk4,
    /// Linear half step, frozen-potential phase step with projection, linear
    /// half step.
    StrangSplit,
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub interaction: InteractionSpec,
    /// Total time; negative values run the flow backwards.
    pub t_final: f64,
    pub dt: f64,
    pub integrator: Integrator,
    /// Record a checkpoint every this many steps (the final state is always
    /// recorded).
    pub checkpoint_every: usize,
}

impl FlowConfig {
    pub fn new(interaction: InteractionSpec, t_final: f64, dt: f64) -> Self {
        Self {
            interaction,
            t_final,
            dt,
            integrator: Integrator::IfRk4,
            checkpoint_every: 10,
        }
    }

    /// Number of steps; T/dt must be an integer.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive and T finite (dt={}, T={})",
                self.dt, self.t_final
            )));
        }
        let ratio = self.t_final.abs() / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "T/dt = {ratio} is not an integer number of steps"
            )));
        }
        Ok(steps as usize)
    }
}

/// X(u) = −iAu + i∇h^I(u).
pub fn vector_field(u: &FourierField, interaction: &InteractionSpec) -> Result<FourierField> {
    Propagator::new(interaction, u.d(), u.n())?.vector_field(u)
}

/// One-step maps of the truncated flow for a fixed (d, n, interaction).
#[derive(Debug, Clone)]
pub struct Propagator {
    ev: InteractionEvaluator,
    a: SpectralMultiplier,
}

impl Propagator {
    pub fn new(interaction: &InteractionSpec, d: usize, n: usize) -> Result<Self> {
        Ok(Self {
            ev: InteractionEvaluator::new(interaction, d, n)?,
            a: SpectralMultiplier::operator_a(d, n)?,
        })
    }

    pub fn evaluator(&self) -> &InteractionEvaluator {
        &self.ev
    }

    pub fn vector_field(&self, u: &FourierField) -> Result<FourierField> {
        let mut x = self.nonlinear(u)?;
        for ((xk, uk), ak) in x.coeffs_mut().iter_mut().zip(u.coeffs()).zip(self.a.weights()) {
            *xk -= I * ak * uk;
        }
        Ok(x)
    }

    /// h = h0 − h^I.
    pub fn hamiltonian(&self, u: &FourierField) -> Result<f64> {
        Ok(free_energy(u) - self.ev.energy(u)?)
    }

    fn nonlinear(&self, u: &FourierField) -> Result<FourierField> {
        Ok(self.ev.gradient(u)?.scale_complex(I))
    }

    /// e^{−iAt} u.
    pub fn linear(&self, u: &FourierField, t: f64) -> FourierField {
        let mut out = u.clone();
        for (c, a) in out.coeffs_mut().iter_mut().zip(self.a.weights()) {
            *c *= Complex64::from_polar(1.0, -a * t);
        }
        out
    }

    fn combine(u: &FourierField, h: f64, k: &FourierField) -> FourierField {
        let mut out = u.clone();
        out.axpy(Complex64::new(h, 0.0), k).expect("same shape");
        out
    }

    /// One step of size h (h may be negative).
    pub fn step(&self, u: &FourierField, h: f64, integrator: Integrator) -> Result<FourierField> {
        match integrator {
            Integrator::IfRk4 => self.step_if_rk4(u, h),
            Integrator::StrangSplit => self.step_strang(u, h),
        }
    }

    fn step_if_rk4(&self, u: &FourierField, h: f64) -> Result<FourierField> {
        let k1 = self.nonlinear(u)?;
        let k2 = self.nonlinear(&self.linear(&Self::combine(u, h / 2.0, &k1), h / 2.0))?;
        let eh_u = self.linear(u, h / 2.0);
        let k3 = self.nonlinear(&Self::combine(&eh_u, h / 2.0, &k2))?;
        let k4 = self.nonlinear(&Self::combine(&self.linear(u, h), h, &self.linear(&k3, h / 2.0)))?;
        let mut out = self.linear(u, h);
        let mid = Self::combine(&k2, 1.0, &k3);
        out.axpy(Complex64::new(h / 6.0, 0.0), &self.linear(&k1, h))?;
        out.axpy(Complex64::new(h / 3.0, 0.0), &self.linear(&mid, h / 2.0))?;
        out.axpy(Complex64::new(h / 6.0, 0.0), &k4)?;
        Ok(out)
    }

    fn step_strang(&self, u: &FourierField, h: f64) -> Result<FourierField> {
        let half = self.linear(u, h / 2.0);
        let (w, mut grid) = self.ev.multiplier_on_grid(&half)?;
        for (z, w) in grid.iter_mut().zip(&w) {
            *z *= Complex64::from_polar(1.0, w * h);
        }
        let kicked = self.ev.grid().analyze(&mut grid, u.n())?;
        Ok(self.linear(&kicked, h / 2.0))
    }
}
