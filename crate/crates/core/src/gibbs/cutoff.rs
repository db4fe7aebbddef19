//! Mass cutoffs χ^(δ)_R.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffShape {
    /// Indicator of (−R, R).
    Sharp,
    /// C^∞ transition: 1 on [−δR, δR], 0 outside (−R, R).
    SmoothBump,
}

/// Cutoff (R, δ, shape). R = +∞ disables the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    radius: f64,
    delta: f64,
    shape: CutoffShape,
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cutoff radius must be positive, got {radius}")))
    }
}

impl CutoffSpec {
    pub fn sharp(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            radius,
            delta: 1.0,
            shape: CutoffShape::Sharp,
        })
    }

    /// Smooth bump with plateau δR; δ = 1 gives the sharp indicator.
    pub fn smooth(radius: f64, delta: f64) -> Result<Self> {
        check_radius(radius)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0,1], got {delta}")));
        }
        if delta == 1.0 {
            return Self::sharp(radius);
        }
        Ok(Self {
            radius,
            delta,
            shape: CutoffShape::SmoothBump,
        })
    }

    pub fn none() -> Self {
        Self {
            radius: f64::INFINITY,
            delta: 1.0,
            shape: CutoffShape::Sharp,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn shape(&self) -> CutoffShape {
        self.shape
    }

    pub fn is_none(&self) -> bool {
        self.radius.is_infinite()
    }

    pub fn value(&self, x: f64) -> f64 {
        cutoff_value(x, self)
    }

    /// dχ/dx; zero for the sharp indicator away from its jumps.
    pub fn derivative(&self, x: f64) -> f64 {
        if self.shape == CutoffShape::Sharp || self.is_none() {
            return 0.0;
        }
        let scale = self.radius * (1.0 - self.delta);
        let t = (1.0 - x.abs() / self.radius) / (1.0 - self.delta);
        -x.signum() * transition_derivative(t) / scale
    }
}

fn bump_f(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// T(t) = f(t)/(f(t)+f(1−t)), exactly 0 for t ≤ 0 and 1 for t ≥ 1.
pub fn transition(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump_f(t);
        a / (a + bump_f(1.0 - t))
    }
}

fn transition_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (bump_f(t), bump_f(1.0 - t));
    let (da, db) = (a / (t * t), b / ((1.0 - t) * (1.0 - t)));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// χ^(δ)_R(x).
pub fn cutoff_value(x: f64, spec: &CutoffSpec) -> f64 {
    if spec.is_none() {
        return 1.0;
    }
    match spec.shape {
        CutoffShape::Sharp => {
            if x.abs() < spec.radius {
                1.0
            } else {
                0.0
            }
        }
        CutoffShape::SmoothBump => transition((1.0 - x.abs() / spec.radius) / (1.0 - spec.delta)),
    }
}
