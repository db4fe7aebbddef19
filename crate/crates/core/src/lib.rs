//! Spectral Monte-Carlo laboratory for truncated Gibbs measures of focusing
//! NLS and Hartree equations on the torus T^d, d = 1, 2, 3.
//!
//! Fields are stored as Fourier coefficients on the cube |k|_∞ ≤ n. The free
//! field samples û(k) = g_k/⟨k⟩ with standard complex Gaussians g_k
//! (E|g_k|² = 1), so the reference Gaussian measure has density proportional to
//! exp(−β h0) with h0(u) = ½⟨u, Au⟩ and β = [`GIBBS_BETA`] = 2. Every identity
//! that involves the measure carries this β explicitly.

pub mod concentration;
pub mod dynamics;
pub mod error;
pub mod fourier_field;
pub mod gibbs;
pub mod kms;
pub mod observables;
pub mod stats;

pub use error::{Error, Result};

/// Inverse temperature of the free measure relative to h0.
pub const GIBBS_BETA: f64 = 2.0;
