//! Free-field sampling with per-sample random streams.
//!
//! Each sample index owns a ChaCha8 stream keyed by the master seed. Modes are
//! drawn shell by shell (|k|_∞ = 0, 1, 2, ...), lexicographically inside each
//! shell, so the draw for a mode does not depend on the cutoff n: a sample at
//! cutoff n is exactly the projection of the same sample at any larger cutoff.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{bracket_sq, FieldShape, FourierField};
use crate::error::Result;

/// Master seed plus the rule sample index → independent stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedPolicy {
    master: u64,
}

impl SeedPolicy {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Generator for sample `index`; streams for distinct indices never overlap.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(index);
        rng
    }

    /// A policy for an auxiliary purpose, decorrelated from this one.
    pub fn derive(&self, tag: u64) -> Self {
        let mut z = self.master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Self::new(z ^ (z >> 31))
    }
}

/// Storage offsets of the cube |k|_∞ ≤ n in draw order.
pub fn shell_order(d: usize, n: usize) -> Result<Arc<Vec<usize>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<usize>>>>> = OnceLock::new();
    let shape = FieldShape::new(d, n)?;
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(order) = cache.lock().expect("shell cache poisoned").get(&(d, n)) {
        return Ok(order.clone());
    }
    let mut order: Vec<usize> = (0..shape.len()).collect();
    order.sort_by_key(|&off| (shape.index_at(off).sup_norm(), off));
    let order = Arc::new(order);
    cache
        .lock()
        .expect("shell cache poisoned")
        .insert((d, n), order.clone());
    Ok(order)
}

/// Standard complex Gaussians g = (ξ₁ + iξ₂)/√2, E|g|² = 1, one per mode, in
/// storage order.
pub fn sample_gaussians(d: usize, n: usize, seed: &SeedPolicy, index: u64) -> Result<Vec<Complex64>> {
    let order = shell_order(d, n)?;
    let mut rng = seed.rng(index);
    let mut g = vec![Complex64::new(0.0, 0.0); order.len()];
    for &off in order.iter() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        g[off] = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    }
    Ok(g)
}

/// One draw of the free field û(k) = g_k/⟨k⟩ on |k|_∞ ≤ n.
pub fn sample_free_field(d: usize, n: usize, seed: &SeedPolicy, index: u64) -> Result<FourierField> {
    let mut g = sample_gaussians(d, n, seed, index)?;
    let shape = FieldShape::new(d, n)?;
    for (off, c) in g.iter_mut().enumerate() {
        *c /= bracket_sq(shape.index_at(off).norm_sq()).sqrt();
    }
    FourierField::from_coeffs(d, n, g)
}
