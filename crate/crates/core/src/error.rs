use thiserror::Error;

/// Errors surfaced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 1, 2 or 3)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected d={expected}, got d={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: fields have (d, n) = {left:?} and {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("cannot project a field with cutoff {n} onto the larger cutoff {m}")]
    ProjectionExtends { m: usize, n: usize },

    #[error("grid of {grid} points per axis is too small (need at least {min})")]
    GridTooSmall { grid: usize, min: usize },

    #[error("potential cube n_V={n_v} does not cover frequency differences up to {needed}")]
    PotentialTooSmall { n_v: usize, needed: usize },

    #[error("interaction {variant} is not defined in dimension {d}")]
    InteractionDimension { variant: &'static str, d: usize },

    #[error("Gibbs weight overflow: beta*h^I = {0} (cutoff radius too large for this interaction)")]
    WeightOverflow(f64),

    #[error("degenerate ensemble: all importance weights vanish")]
    DegenerateEnsemble,

    #[error("flow became unstable at t = {time}")]
    Unstable { time: f64 },

    #[error("localization radius R'={inner} must be below the cutoff radius R={outer}")]
    LocalizationRadius { inner: f64, outer: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
