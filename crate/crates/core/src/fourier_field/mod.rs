//! Truncated complex Fourier fields on the torus T^d.
//!
//! A [`FourierField`] stores the coefficients û(k) for every lattice index in
//! the cube |k|_∞ ≤ n, densely and in lexicographic order (first component most
//! significant). The basis is e_k(x) = exp(2πi k·x) on the unit torus, so the
//! L² inner product is the plain coefficient sum ⟨u, v⟩ = Σ û(k) conj(v̂(k)).

mod dump;
mod grid;
mod sampling;

pub use dump::{read_field_dump, write_field_dump, FieldDumpHeader, FIELD_DUMP_MAGIC};
pub use grid::{fast_grid_size, from_real_space, to_real_space, SpectralGrid};
pub use sampling::{sample_free_field, sample_gaussians, shell_order, SeedPolicy};

use std::f64::consts::PI;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest supported torus dimension.
pub const MAX_DIM: usize = 3;

/// Integer frequency vector k ∈ Z^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeIndex {
    comps: [i32; MAX_DIM],
    dim: usize,
}

impl LatticeIndex {
    pub fn new(components: &[i32]) -> Result<Self> {
        let dim = components.len();
        check_dim(dim)?;
        let mut comps = [0; MAX_DIM];
        comps[..dim].copy_from_slice(components);
        Ok(Self { comps, dim })
    }

    pub fn zero(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            comps: [0; MAX_DIM],
            dim: d,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[i32] {
        &self.comps[..self.dim]
    }

    pub fn sup_norm(&self) -> u32 {
        self.components()
            .iter()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.components()
            .iter()
            .map(|&c| f64::from(c) * f64::from(c))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

impl serde::Serialize for LatticeIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.components().serialize(s)
    }
}

impl std::ops::Neg for LatticeIndex {
    type Output = Self;

    fn neg(mut self) -> Self {
        for c in &mut self.comps {
            *c = -*c;
        }
        self
    }
}

impl std::fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(d))
    }
}

/// ⟨k⟩ = sqrt(4π²|k|² + 1), the square root of the symbol of A = −Δ + 1.
pub fn japanese_bracket(k: &LatticeIndex) -> f64 {
    bracket_sq(k.norm_sq()).sqrt()
}

#[inline]
pub(crate) fn bracket_sq(norm_sq: f64) -> f64 {
    4.0 * PI * PI * norm_sq + 1.0
}

/// Geometry of the truncation cube [−n, n]^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldShape {
    d: usize,
    n: usize,
}

impl FieldShape {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat position of `k`, or `None` when k lies outside the cube.
    pub fn offset(&self, k: &LatticeIndex) -> Option<usize> {
        if k.dim() != self.d {
            return None;
        }
        let n = self.n as i64;
        let side = self.side();
        let mut off = 0usize;
        for &c in k.components() {
            let c = i64::from(c);
            if c < -n || c > n {
                return None;
            }
            off = off * side + (c + n) as usize;
        }
        Some(off)
    }

    /// Inverse of [`FieldShape::offset`].
    pub fn index_at(&self, mut offset: usize) -> LatticeIndex {
        let side = self.side();
        let mut comps = [0i32; MAX_DIM];
        for axis in (0..self.d).rev() {
            comps[axis] = (offset % side) as i32 - self.n as i32;
            offset /= side;
        }
        LatticeIndex {
            comps,
            dim: self.d,
        }
    }

    /// All lattice indices of the cube in storage order.
    pub fn indices(&self) -> impl Iterator<Item = LatticeIndex> + '_ {
        (0..self.len()).map(move |i| self.index_at(i))
    }
}

/// Truncated field u_n = Σ_{|k|_∞ ≤ n} û(k) e_k.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    shape: FieldShape,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        let shape = FieldShape::new(d, n)?;
        Ok(Self::zeros_like_shape(shape))
    }

    pub fn zeros_like_shape(shape: FieldShape) -> Self {
        Self {
            shape,
            coeffs: vec![Complex64::new(0.0, 0.0); shape.len()],
        }
    }

    pub fn from_fn(d: usize, n: usize, mut f: impl FnMut(&LatticeIndex) -> Complex64) -> Result<Self> {
        let shape = FieldShape::new(d, n)?;
        let coeffs = shape.indices().map(|k| f(&k)).collect();
        Ok(Self { shape, coeffs })
    }

    /// Wraps raw coefficients given in lexicographic order.
    pub fn from_coeffs(d: usize, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let shape = FieldShape::new(d, n)?;
        if coeffs.len() != shape.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients for (d, n) = ({d}, {n}), got {}",
                shape.len(),
                coeffs.len()
            )));
        }
        Ok(Self { shape, coeffs })
    }

    /// Single-mode field û(k0) = c.
    pub fn single_mode(d: usize, n: usize, k0: &LatticeIndex, c: Complex64) -> Result<Self> {
        let mut u = Self::zeros(d, n)?;
        u.set(k0, c)?;
        Ok(u)
    }

    pub fn shape(&self) -> FieldShape {
        self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient û(k); zero outside the cube.
    pub fn get(&self, k: &LatticeIndex) -> Complex64 {
        self.shape
            .offset(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set(&mut self, k: &LatticeIndex, value: Complex64) -> Result<()> {
        let i = self.shape.offset(k).ok_or_else(|| {
            Error::InvalidParameter(format!("index {k} outside the cube |k| <= {}", self.n()))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticeIndex, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.shape.index_at(i), c))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: (self.d(), self.n()),
                right: (other.d(), other.n()),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// self += a·x
    pub fn axpy(&mut self, a: Complex64, x: &Self) -> Result<()> {
        self.check_same_shape(x)?;
        for (s, &v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += a * v;
        }
        Ok(())
    }

    pub fn scale(&self, a: f64) -> Self {
        self.scale_complex(Complex64::new(a, 0.0))
    }

    pub fn scale_complex(&self, a: Complex64) -> Self {
        Self {
            shape: self.shape,
            coeffs: self.coeffs.iter().map(|&c| a * c).collect(),
        }
    }

    /// Complex L² inner product ⟨self, other⟩, linear in the first slot.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    /// Real inner product Re⟨self, other⟩ of the underlying real Hilbert space.
    pub fn real_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum())
    }

    /// ‖u‖²_{L²} = Σ |û(k)|².
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// SHA-256 over the little-endian (Re, Im) coefficient bytes.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        self.feed_digest(&mut hasher);
        hasher.finalize().into()
    }

    pub(crate) fn feed_digest(&self, hasher: &mut Sha256) {
        hasher.update((self.d() as u64).to_le_bytes());
        hasher.update((self.n() as u64).to_le_bytes());
        for c in &self.coeffs {
            hasher.update(c.re.to_le_bytes());
            hasher.update(c.im.to_le_bytes());
        }
    }
}

/// Hash of a whole ensemble of fields, in index order.
pub fn ensemble_digest<'a>(fields: impl IntoIterator<Item = &'a FourierField>) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for u in fields {
        u.feed_digest(&mut hasher);
    }
    hasher.finalize().into()
}

/// Per-index real weight m(k) acting diagonally on coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMultiplier {
    shape: FieldShape,
    weights: Vec<f64>,
}

impl SpectralMultiplier {
    pub fn from_fn(d: usize, n: usize, f: impl Fn(&LatticeIndex) -> f64) -> Result<Self> {
        let shape = FieldShape::new(d, n)?;
        let weights = shape.indices().map(|k| f(&k)).collect();
        Ok(Self { shape, weights })
    }

    /// The operator A = −Δ + 1, m(k) = ⟨k⟩².
    pub fn operator_a(d: usize, n: usize) -> Result<Self> {
        Self::from_fn(d, n, |k| bracket_sq(k.norm_sq()))
    }

    /// ⟨k⟩^α.
    pub fn bracket_power(d: usize, n: usize, alpha: f64) -> Result<Self> {
        Self::from_fn(d, n, |k| japanese_bracket(k).powf(alpha))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: &LatticeIndex) -> Option<f64> {
        self.shape.offset(k).map(|i| self.weights[i])
    }

    pub fn apply(&self, u: &FourierField) -> Result<FourierField> {
        if u.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                left: (self.shape.d(), self.shape.n()),
                right: (u.d(), u.n()),
            });
        }
        Ok(FourierField {
            shape: self.shape,
            coeffs: u
                .coeffs
                .iter()
                .zip(&self.weights)
                .map(|(&c, &m)| c * m)
                .collect(),
        })
    }
}

/// ‖u‖_{H^α} = (Σ ⟨k⟩^{2α} |û(k)|²)^{1/2}.
pub fn sobolev_norm(u: &FourierField, alpha: f64) -> f64 {
    u.iter()
        .map(|(k, c)| bracket_sq(k.norm_sq()).powf(alpha) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// P_m u: keep the modes with |k|_∞ ≤ m, returned on the smaller cube.
pub fn project(u: &FourierField, m: usize) -> Result<FourierField> {
    if m > u.n() {
        return Err(Error::ProjectionExtends { m, n: u.n() });
    }
    FourierField::from_fn(u.d(), m, |k| u.get(k))
}

/// Re-embeds u into a larger cube (zero padding in frequency).
pub fn embed(u: &FourierField, m: usize) -> Result<FourierField> {
    if m < u.n() {
        return Err(Error::InvalidParameter(format!(
            "cannot embed cutoff {} into smaller cutoff {m}",
            u.n()
        )));
    }
    FourierField::from_fn(u.d(), m, |k| u.get(k))
}

/// Whether s lies in the admissible range (d/2 − 1, 1].
pub fn admissible_regularity(d: usize, s: f64) -> bool {
    s > d as f64 / 2.0 - 1.0 && s <= 1.0
}

/// Default Sobolev exponent s for dimension d.
pub fn default_regularity(d: usize) -> f64 {
    match d {
        1 => 0.0,
        2 => 0.25,
        _ => 0.6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bracket_at_zero_is_one() {
        for d in 1..=3 {
            assert_eq!(japanese_bracket(&LatticeIndex::zero(d).unwrap()), 1.0);
        }
    }

    #[test]
    fn bracket_unit_vector_3d() {
        let k = LatticeIndex::new(&[1, 0, 0]).unwrap();
        let expected = (4.0 * PI * PI + 1.0).sqrt();
        assert!((japanese_bracket(&k) - expected).abs() < 1e-14);
    }

    #[test]
    fn offsets_round_trip_in_lexicographic_order() {
        let shape = FieldShape::new(2, 2).unwrap();
        let first = shape.index_at(0);
        assert_eq!(first.components(), &[-2, -2]);
        assert_eq!(shape.index_at(1).components(), &[-2, -1]);
        for (i, k) in shape.indices().enumerate() {
            assert_eq!(shape.offset(&k), Some(i));
        }
        assert_eq!(shape.offset(&LatticeIndex::new(&[3, 0]).unwrap()), None);
    }

    #[test]
    fn sobolev_norm_single_mode() {
        let k0 = LatticeIndex::new(&[1, -2]).unwrap();
        let u = FourierField::single_mode(2, 3, &k0, c(0.3, -0.4)).unwrap();
        for alpha in [-0.6, 0.0, 0.5, 1.0] {
            let expected = japanese_bracket(&k0).powf(alpha) * 0.5;
            assert!((sobolev_norm(&u, alpha) - expected).abs() < 1e-12 * expected.max(1.0));
        }
        assert_eq!(sobolev_norm(&FourierField::zeros(3, 2).unwrap(), 0.3), 0.0);
    }

    #[test]
    fn projection_errors_and_identity() {
        let u = FourierField::from_fn(1, 3, |k| c(k.components()[0] as f64, 1.0)).unwrap();
        assert_eq!(project(&u, 3).unwrap(), u);
        assert!(matches!(project(&u, 4), Err(Error::ProjectionExtends { m: 4, n: 3 })));
        let p = project(&u, 1).unwrap();
        assert_eq!(p.n(), 1);
        assert_eq!(project(&p, 1).unwrap(), p);
    }

    #[test]
    fn arithmetic_checks_shapes() {
        let a = FourierField::zeros(2, 2).unwrap();
        let b = FourierField::zeros(2, 3).unwrap();
        assert!(a.add(&b).is_err());
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn multiplier_matches_bracket() {
        let a = SpectralMultiplier::operator_a(3, 1).unwrap();
        let k = LatticeIndex::new(&[1, 1, 0]).unwrap();
        assert!((a.weight(&k).unwrap() - japanese_bracket(&k).powi(2)).abs() < 1e-12);
        assert!(a.weights().iter().all(|&w| w > 0.0));
    }

    fn arb_field(d: usize, n: usize) -> impl Strategy<Value = FourierField> {
        let len = (2 * n + 1).pow(d as u32);
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), len).prop_map(move |v| {
            FourierField::from_coeffs(d, n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn bracket_is_even(a in -20i32..20, b in -20i32..20, e in -20i32..20) {
            let k = LatticeIndex::new(&[a, b, e]).unwrap();
            prop_assert_eq!(japanese_bracket(&k), japanese_bracket(&-k));
        }

        #[test]
        fn projection_never_increases_norms(u in arb_field(2, 3), m in 0usize..=3, alpha in 0.0f64..1.5) {
            let p = project(&u, m).unwrap();
            prop_assert!(sobolev_norm(&p, alpha) <= sobolev_norm(&u, alpha) * (1.0 + 1e-15));
            prop_assert_eq!(project(&p, m).unwrap(), p);
        }
    }
}
