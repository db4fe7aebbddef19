//! Cylindrical test functions, Poisson brackets and Monte-Carlo checks of the
//! integration-by-parts, Liouville and KMS identities.
//!
//! With μ ∝ exp(−β h) χ(M) (β = [`GIBBS_BETA`]) and X(u) = −iAu + i∇h^I(u):
//!
//! * Gaussian integration by parts under μ0:
//!   E[G⟨∇F, ψ⟩] = E[F(−⟨∇G, ψ⟩ + β G⟨u, Aψ⟩)]
//! * Liouville: ∫⟨∇F, X⟩ dμ = 0
//! * KMS: ∫{F, G} dμ = β ∫⟨∇F, X⟩ G dμ, for G supported where χ is constant.
//!
//! All inner products are real parts of the L² pairing.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier_field::{japanese_bracket, FourierField, LatticeIndex, SeedPolicy, SpectralMultiplier};
use crate::gibbs::{CutoffShape, CutoffSpec, WeightedEnsemble};
use crate::observables::InteractionSpec;
use crate::stats::McEstimate;
use crate::GIBBS_BETA;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Plateau fraction of the mass-localization bump.
pub const LOCALIZATION_DELTA: f64 = 0.8;

/// A smooth real functional with an exact gradient.
pub trait TestFunction: Send + Sync {
    fn value(&self, u: &FourierField) -> f64;

    fn gradient(&self, u: &FourierField) -> FourierField;

    fn value_and_gradient(&self, u: &FourierField) -> (f64, FourierField) {
        (self.value(u), self.gradient(u))
    }

    /// Largest |k|_∞ the function depends on through individual modes.
    fn max_mode(&self) -> u32;

    /// R′ when the function vanishes for |M(u)| ≥ R′.
    fn localization_radius(&self) -> Option<f64> {
        None
    }
}

/// c · Π y_i^{p_i}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    fn value(&self, y: &[f64]) -> f64 {
        self.coef * y.iter().zip(&self.powers).map(|(y, &p)| y.powi(p as i32)).product::<f64>()
    }

    fn add_gradient(&self, y: &[f64], out: &mut [f64]) {
        for (i, &p) in self.powers.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let mut term = self.coef * p as f64 * y[i].powi(p as i32 - 1);
            for (j, (&yj, &pj)) in y.iter().zip(&self.powers).enumerate() {
                if j != i {
                    term *= yj.powi(pj as i32);
                }
            }
            out[i] += term;
        }
    }
}

/// Profiles φ: R^{2m} → R on the coordinates (Re û(k_1), Im û(k_1), …).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Profile {
    /// c + Σ a_i x_i. Unbounded; used for exact small cases.
    Affine { constant: f64, slope: Vec<f64> },
    /// p(y) exp(−|y|²/2) with y_i = (x_i − c_i)/L_i.
    GaussianPoly {
        center: Vec<f64>,
        scales: Vec<f64>,
        poly: Vec<Monomial>,
    },
    /// exp(−1/(1 − |y|²)) for |y| < 1, else 0, with y_i = (x_i − c_i)/L_i.
    CompactBump { center: Vec<f64>, scales: Vec<f64> },
}

impl Profile {
    fn arity(&self) -> usize {
        match self {
            Self::Affine { slope, .. } => slope.len(),
            Self::GaussianPoly { center, .. } | Self::CompactBump { center, .. } => center.len(),
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("profile: {msg}")));
        match self {
            Self::Affine { .. } => Ok(()),
            Self::GaussianPoly { center, scales, poly } => {
                if scales.len() != center.len() || scales.iter().any(|l| !(*l > 0.0)) {
                    return bad("scales must be positive, one per coordinate");
                }
                if poly.iter().any(|m| m.powers.len() != center.len()) {
                    return bad("monomial arity differs from the coordinate count");
                }
                Ok(())
            }
            Self::CompactBump { center, scales } => {
                if scales.len() != center.len() || scales.iter().any(|l| !(*l > 0.0)) {
                    return bad("scales must be positive, one per coordinate");
                }
                Ok(())
            }
        }
    }

    /// φ(x) and ∂φ/∂x.
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Self::Affine { constant, slope } => {
                let v = constant + x.iter().zip(slope).map(|(x, a)| x * a).sum::<f64>();
                (v, slope.clone())
            }
            Self::GaussianPoly { center, scales, poly } => {
                let y: Vec<f64> = x.iter().zip(center).zip(scales).map(|((x, c), l)| (x - c) / l).collect();
                let gauss = (-0.5 * y.iter().map(|y| y * y).sum::<f64>()).exp();
                let p: f64 = poly.iter().map(|m| m.value(&y)).sum();
                let mut dp = vec![0.0; y.len()];
                for m in poly {
                    m.add_gradient(&y, &mut dp);
                }
                let grad = dp
                    .iter()
                    .zip(&y)
                    .zip(scales)
                    .map(|((dp, y), l)| (dp - y * p) * gauss / l)
                    .collect();
                (p * gauss, grad)
            }
            Self::CompactBump { center, scales } => {
                let y: Vec<f64> = x.iter().zip(center).zip(scales).map(|((x, c), l)| (x - c) / l).collect();
                let r2: f64 = y.iter().map(|y| y * y).sum();
                if r2 >= 1.0 {
                    return (0.0, vec![0.0; y.len()]);
                }
                let s = 1.0 - r2;
                let v = (-1.0 / s).exp();
                let grad = y.iter().zip(scales).map(|(y, l)| -2.0 * y * v / (s * s * l)).collect();
                (v, grad)
            }
        }
    }
}

/// F(u) = φ(Re û(k_1), Im û(k_1), …, Re û(k_m), Im û(k_m)).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylFn {
    modes: Vec<LatticeIndex>,
    profile: Profile,
}

impl CylFn {
    pub fn new(modes: Vec<LatticeIndex>, profile: Profile) -> Result<Self> {
        if profile.arity() != 2 * modes.len() {
            return Err(Error::InvalidParameter(format!(
                "profile takes {} coordinates but {} modes give {}",
                profile.arity(),
                modes.len(),
                2 * modes.len()
            )));
        }
        profile.check()?;
        for (i, k) in modes.iter().enumerate() {
            if modes[..i].contains(k) {
                return Err(Error::InvalidParameter(format!("mode {k} listed twice")));
            }
            if k.dim() != modes[0].dim() {
                return Err(Error::DimensionMismatch {
                    expected: modes[0].dim(),
                    found: k.dim(),
                });
            }
        }
        Ok(Self { modes, profile })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            modes: Vec::new(),
            profile: Profile::Affine {
                constant: c,
                slope: Vec::new(),
            },
        }
    }

    /// Re û(k) (imaginary = false) or Im û(k).
    pub fn coordinate(k: LatticeIndex, imaginary: bool) -> Self {
        let slope = if imaginary { vec![0.0, 1.0] } else { vec![1.0, 0.0] };
        Self {
            modes: vec![k],
            profile: Profile::Affine { constant: 0.0, slope },
        }
    }

    pub fn modes(&self) -> &[LatticeIndex] {
        &self.modes
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    fn coordinates(&self, u: &FourierField) -> Vec<f64> {
        self.modes
            .iter()
            .flat_map(|k| {
                let c = u.get(k);
                [c.re, c.im]
            })
            .collect()
    }

    fn gradient_from(&self, u: &FourierField, partials: &[f64]) -> FourierField {
        let mut g = FourierField::zeros_like_shape(u.shape());
        for (k, p) in self.modes.iter().zip(partials.chunks_exact(2)) {
            // modes beyond the truncation read as zero and carry no gradient
            let _ = g.set(k, Complex64::new(p[0], p[1]));
        }
        g
    }
}

impl TestFunction for CylFn {
    fn value(&self, u: &FourierField) -> f64 {
        self.profile.eval(&self.coordinates(u)).0
    }

    fn gradient(&self, u: &FourierField) -> FourierField {
        self.value_and_gradient(u).1
    }

    fn value_and_gradient(&self, u: &FourierField) -> (f64, FourierField) {
        let (v, partials) = self.profile.eval(&self.coordinates(u));
        (v, self.gradient_from(u, &partials))
    }

    fn max_mode(&self) -> u32 {
        self.modes.iter().map(LatticeIndex::sup_norm).max().unwrap_or(0)
    }
}

/// G(u) = base(u) · g(M(u)) with g = 1 for |M| ≤ 0.8R′ and g = 0 for
/// |M| ≥ R′.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizedFn {
    base: CylFn,
    window: CutoffSpec,
}

impl LocalizedFn {
    pub fn new(base: CylFn, radius: f64) -> Result<Self> {
        Ok(Self {
            base,
            window: CutoffSpec::smooth(radius, LOCALIZATION_DELTA)?,
        })
    }

    pub fn base(&self) -> &CylFn {
        &self.base
    }

    pub fn radius(&self) -> f64 {
        self.window.radius()
    }

    fn mass(u: &FourierField) -> f64 {
        crate::observables::wick_mass(u)
    }
}

impl TestFunction for LocalizedFn {
    fn value(&self, u: &FourierField) -> f64 {
        let g = self.window.value(Self::mass(u));
        if g == 0.0 {
            0.0
        } else {
            g * self.base.value(u)
        }
    }

    fn gradient(&self, u: &FourierField) -> FourierField {
        self.value_and_gradient(u).1
    }

    fn value_and_gradient(&self, u: &FourierField) -> (f64, FourierField) {
        let m = Self::mass(u);
        let g = self.window.value(m);
        if g == 0.0 {
            return (0.0, FourierField::zeros_like_shape(u.shape()));
        }
        let (b, grad_b) = self.base.value_and_gradient(u);
        // ∇M = 2u
        let mut grad = u.scale(2.0 * b * self.window.derivative(m));
        grad.axpy(Complex64::new(g, 0.0), &grad_b).expect("same shape");
        (g * b, grad)
    }

    fn max_mode(&self) -> u32 {
        self.base.max_mode()
    }

    fn localization_radius(&self) -> Option<f64> {
        Some(self.radius())
    }
}

/// Pointwise product of two test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Product<A, B>(pub A, pub B);

impl<A: TestFunction, B: TestFunction> TestFunction for Product<A, B> {
    fn value(&self, u: &FourierField) -> f64 {
        self.0.value(u) * self.1.value(u)
    }

    fn gradient(&self, u: &FourierField) -> FourierField {
        self.value_and_gradient(u).1
    }

    fn value_and_gradient(&self, u: &FourierField) -> (f64, FourierField) {
        let (a, ga) = self.0.value_and_gradient(u);
        let (b, gb) = self.1.value_and_gradient(u);
        let mut g = ga.scale(b);
        g.axpy(Complex64::new(a, 0.0), &gb).expect("same shape");
        (a * b, g)
    }

    fn max_mode(&self) -> u32 {
        self.0.max_mode().max(self.1.max_mode())
    }

    fn localization_radius(&self) -> Option<f64> {
        match (self.0.localization_radius(), self.1.localization_radius()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// {F, G}(u) = Re⟨∇F(u), −i∇G(u)⟩.
pub fn poisson_bracket(f: &dyn TestFunction, g: &dyn TestFunction, u: &FourierField) -> f64 {
    bracket_of(&f.gradient(u), &g.gradient(u))
}

fn bracket_of(grad_f: &FourierField, grad_g: &FourierField) -> f64 {
    grad_f
        .coeffs()
        .iter()
        .zip(grad_g.coeffs())
        .map(|(a, b)| (a * (-I * b).conj()).re)
        .sum()
}

/// Deliberate corruptions used to check that the residuals detect a wrong
/// identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Calibration {
    /// Use −iAu − i∇h^I in place of X.
    pub flip_interaction_gradient: bool,
    /// Flip the sign of A (in X, and in the Gaussian integration-by-parts term).
    pub flip_a: bool,
}

/// Paired Monte-Carlo comparison of the two sides of an identity.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub lhs: McEstimate,
    pub rhs: McEstimate,
    /// Estimate of E[lhs − rhs] on the same samples.
    pub residual: McEstimate,
    pub z: f64,
}

impl IdentityReport {
    fn from_columns(ens: &WeightedEnsemble, lhs: &[f64], rhs: &[f64]) -> Result<Self> {
        let diff: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
        let residual = ens.weighted_mean(&diff)?;
        Ok(Self {
            lhs: ens.weighted_mean(lhs)?,
            rhs: ens.weighted_mean(rhs)?,
            z: residual.z(),
            residual,
        })
    }
}

struct FieldContext {
    a: SpectralMultiplier,
    calibration: Calibration,
}

impl FieldContext {
    fn new(ens: &WeightedEnsemble, calibration: Calibration) -> Result<Self> {
        Ok(Self {
            a: SpectralMultiplier::operator_a(ens.d(), ens.n())?,
            calibration,
        })
    }

    fn a_sign(&self) -> f64 {
        if self.calibration.flip_a {
            -1.0
        } else {
            1.0
        }
    }

    /// X(u), possibly corrupted.
    fn vector_field(&self, ens: &WeightedEnsemble, u: &FourierField) -> Result<FourierField> {
        let s = if self.calibration.flip_interaction_gradient { -1.0 } else { 1.0 };
        let mut x = ens.evaluator().gradient(u)?.scale_complex(I * s);
        let a_sign = self.a_sign();
        for ((xk, uk), ak) in x.coeffs_mut().iter_mut().zip(u.coeffs()).zip(self.a.weights()) {
            *xk -= I * (a_sign * ak) * uk;
        }
        Ok(x)
    }

    /// Re⟨u, Aψ⟩ (with the calibration sign).
    fn u_a_psi(&self, u: &FourierField, psi: &FourierField) -> f64 {
        self.a_sign()
            * u.coeffs()
                .iter()
                .zip(psi.coeffs())
                .zip(self.a.weights())
                .map(|((u, p), a)| a * (u * p.conj()).re)
                .sum::<f64>()
    }
}

fn check_modes(ens: &WeightedEnsemble, fs: &[&dyn TestFunction]) -> Result<()> {
    for f in fs {
        if f.max_mode() as usize > ens.n() {
            return Err(Error::InvalidParameter(format!(
                "test function uses modes up to {} beyond the truncation n = {}",
                f.max_mode(),
                ens.n()
            )));
        }
    }
    Ok(())
}

fn check_free(ens: &WeightedEnsemble) -> Result<()> {
    if !ens.cutoff().is_none() || *ens.interaction() != InteractionSpec::Off {
        return Err(Error::InvalidParameter(
            "integration by parts is stated for the free Gaussian measure".into(),
        ));
    }
    Ok(())
}

/// Checks that χ is constant on the support of G: R′ < R, and R′ ≤ δR for
/// a smooth cutoff.
/// G must vanish where the cutoff is not locally constant: R′ < R, and
/// R′ ≤ δR for the smooth cutoff.
pub fn check_localization(cutoff: &CutoffSpec, g: &dyn TestFunction) -> Result<()> {
    if cutoff.is_none() {
        return Ok(());
    }
    let r = cutoff.radius();
    let plateau = match cutoff.shape() {
        CutoffShape::Sharp => r,
        CutoffShape::SmoothBump => cutoff.delta() * r,
    };
    match g.localization_radius() {
        None => Err(Error::InvalidParameter(
            "G must be mass-localized when the measure carries a cutoff".into(),
        )),
        Some(inner) if inner >= r => Err(Error::LocalizationRadius { inner, outer: r }),
        Some(inner) if inner > plateau => Err(Error::LocalizationRadius { inner, outer: plateau }),
        Some(_) => Ok(()),
    }
}

type Triple<'a> = (&'a dyn TestFunction, &'a dyn TestFunction, &'a FourierField);

/// Integration by parts under μ0 for each (F, G, ψ):
/// lhs = G⟨∇F, ψ⟩, rhs = F(−⟨∇G, ψ⟩ + β G⟨u, Aψ⟩).
pub fn ibp_residuals(
    ens: &WeightedEnsemble,
    triples: &[Triple<'_>],
    calibration: Calibration,
) -> Result<Vec<IdentityReport>> {
    check_free(ens)?;
    let fs: Vec<&dyn TestFunction> = triples.iter().flat_map(|t| [t.0, t.1]).collect();
    check_modes(ens, &fs)?;
    for (_, _, psi) in triples {
        if psi.d() != ens.d() || psi.n() != ens.n() {
            return Err(Error::ShapeMismatch {
                left: (ens.d(), ens.n()),
                right: (psi.d(), psi.n()),
            });
        }
    }
    let ctx = FieldContext::new(ens, calibration)?;
    let rows: Vec<Vec<(f64, f64)>> = ens.map(|u, _| {
        Ok(triples
            .iter()
            .map(|(f, g, psi)| {
                let (fv, gf) = f.value_and_gradient(u);
                let (gv, gg) = g.value_and_gradient(u);
                let lhs = gv * gf.real_inner(psi).expect("same shape");
                let rhs = fv * (-gg.real_inner(psi).expect("same shape") + GIBBS_BETA * gv * ctx.u_a_psi(u, psi));
                (lhs, rhs)
            })
            .collect())
    })?;
    reports(ens, &rows, triples.len())
}

/// ∫⟨∇F, X⟩ dμ for each F; rhs is exactly 0.
pub fn liouville_residuals(
    ens: &WeightedEnsemble,
    fs: &[&dyn TestFunction],
    calibration: Calibration,
) -> Result<Vec<IdentityReport>> {
    check_modes(ens, fs)?;
    let ctx = FieldContext::new(ens, calibration)?;
    let rows: Vec<Vec<(f64, f64)>> = ens.map(|u, _| {
        let x = ctx.vector_field(ens, u)?;
        Ok(fs
            .iter()
            .map(|f| (f.gradient(u).real_inner(&x).expect("same shape"), 0.0))
            .collect())
    })?;
    reports(ens, &rows, fs.len())
}

/// KMS residual for each (F, G): lhs = {F, G}, rhs = β⟨∇F, X⟩ G.
pub fn kms_residuals(
    ens: &WeightedEnsemble,
    pairs: &[(&dyn TestFunction, &dyn TestFunction)],
    calibration: Calibration,
) -> Result<Vec<IdentityReport>> {
    let fs: Vec<&dyn TestFunction> = pairs.iter().flat_map(|p| [p.0, p.1]).collect();
    check_modes(ens, &fs)?;
    for (_, g) in pairs {
        check_localization(ens.cutoff(), *g)?;
    }
    let ctx = FieldContext::new(ens, calibration)?;
    let rows: Vec<Vec<(f64, f64)>> = ens.map(|u, _| {
        let x = ctx.vector_field(ens, u)?;
        Ok(pairs
            .iter()
            .map(|(f, g)| {
                let gf = f.gradient(u);
                let (gv, gg) = g.value_and_gradient(u);
                let lhs = bracket_of(&gf, &gg);
                let rhs = GIBBS_BETA * gf.real_inner(&x).expect("same shape") * gv;
                (lhs, rhs)
            })
            .collect())
    })?;
    reports(ens, &rows, pairs.len())
}

/// Single-triple form of [`ibp_residuals`].
pub fn ibp_residual(
    ens: &WeightedEnsemble,
    f: &dyn TestFunction,
    g: &dyn TestFunction,
    psi: &FourierField,
    calibration: Calibration,
) -> Result<IdentityReport> {
    Ok(ibp_residuals(ens, &[(f, g, psi)], calibration)?.remove(0))
}

/// Single-function form of [`liouville_residuals`].
pub fn liouville_residual(
    ens: &WeightedEnsemble,
    f: &dyn TestFunction,
    calibration: Calibration,
) -> Result<IdentityReport> {
    Ok(liouville_residuals(ens, &[f], calibration)?.remove(0))
}

/// Single-pair form of [`kms_residuals`].
pub fn kms_residual(
    ens: &WeightedEnsemble,
    f: &dyn TestFunction,
    g: &dyn TestFunction,
    calibration: Calibration,
) -> Result<IdentityReport> {
    Ok(kms_residuals(ens, &[(f, g)], calibration)?.remove(0))
}

fn reports(ens: &WeightedEnsemble, rows: &[Vec<(f64, f64)>], count: usize) -> Result<Vec<IdentityReport>> {
    (0..count)
        .map(|j| {
            let pick = |side: usize| -> Vec<f64> {
                rows.iter()
                    .map(|r| r.get(j).map_or(0.0, |p| if side == 0 { p.0 } else { p.1 }))
                    .collect()
            };
            IdentityReport::from_columns(ens, &pick(0), &pick(1))
        })
        .collect()
}

/// Profile family for randomized test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GaussianPoly,
    CompactBump,
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// A random cylindrical function on the zero mode and, half of the time, one
/// more mode with |k|_∞ ≤ 1. The zero mode carries most of the Wick mass, so
/// this is where the interaction gradient is largest. Centres and scales
/// follow the free-field spread ⟨k⟩⁻¹/√2 of each coordinate.
pub fn random_cylindrical(d: usize, family: Family, rng: &mut impl Rng) -> Result<CylFn> {
    let side = 3i32;
    let count = side.pow(d as u32);
    let mut modes = vec![LatticeIndex::zero(d)?];
    if rng.gen_bool(0.5) {
        // any nonzero k in the unit cube
        let mut flat = rng.gen_range(1..count);
        let mut comps = vec![0; d];
        for c in comps.iter_mut() {
            *c = match flat % side {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            flat /= side;
        }
        modes.push(LatticeIndex::new(&comps)?);
    }
    let spread: Vec<f64> = modes
        .iter()
        .flat_map(|k| {
            let s = 1.0 / (std::f64::consts::SQRT_2 * japanese_bracket(k));
            [s, s]
        })
        .collect();
    let center: Vec<f64> = spread.iter().map(|s| 0.5 * s * normal(rng)).collect();
    let profile = match family {
        Family::GaussianPoly => {
            let scales = spread.iter().map(|s| s * rng.gen_range(0.7..1.5)).collect();
            let dim = spread.len();
            let mut poly = vec![Monomial {
                coef: normal(rng),
                powers: vec![0; dim],
            }];
            for i in 0..dim {
                let mut powers = vec![0; dim];
                powers[i] = 1;
                poly.push(Monomial {
                    coef: normal(rng),
                    powers,
                });
            }
            let (a, b) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
            let mut powers = vec![0; dim];
            powers[a] += 1;
            powers[b] += 1;
            poly.push(Monomial {
                coef: 0.5 * normal(rng),
                powers,
            });
            Profile::GaussianPoly { center, scales, poly }
        }
        Family::CompactBump => {
            let scales = spread.iter().map(|s| 2.5 * s * rng.gen_range(0.8..1.2)).collect();
            Profile::CompactBump { center, scales }
        }
    };
    CylFn::new(modes, profile)
}

/// A random direction supported on the given modes.
pub fn random_direction(d: usize, n: usize, modes: &[LatticeIndex], rng: &mut impl Rng) -> Result<FourierField> {
    let mut psi = FourierField::zeros(d, n)?;
    for k in modes {
        psi.set(k, Complex64::new(normal(rng), normal(rng)))?;
    }
    Ok(psi)
}

/// Deterministic batches of randomized test functions.
#[derive(Debug, Clone, Copy)]
pub struct TestFunctionSource {
    seed: SeedPolicy,
}

impl TestFunctionSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed: SeedPolicy::new(seed).derive(0x7465_7374),
        }
    }

    /// Function number `i` of the batch.
    pub fn cylindrical(&self, d: usize, family: Family, i: u64) -> Result<CylFn> {
        random_cylindrical(d, family, &mut self.seed.rng(2 * i))
    }

    /// Pair number `i`: F and a localized G with radius `radius` (or a plain
    /// cylindrical G when radius is None).
    pub fn pair(
        &self,
        d: usize,
        family: Family,
        radius: Option<f64>,
        i: u64,
    ) -> Result<(CylFn, Option<LocalizedFn>, CylFn)> {
        let mut rng = self.seed.rng(2 * i + 1);
        let f = random_cylindrical(d, family, &mut rng)?;
        let g = random_cylindrical(d, family, &mut rng)?;
        let localized = radius.map(|r| LocalizedFn::new(g.clone(), r)).transpose()?;
        Ok((f, localized, g))
    }

    /// Triple number `i` for integration by parts: F, G and a direction ψ on
    /// their modes.
    pub fn triple(&self, d: usize, n: usize, family: Family, i: u64) -> Result<(CylFn, CylFn, FourierField)> {
        let mut rng = self.seed.rng(2 * i + 1);
        let f = random_cylindrical(d, family, &mut rng)?;
        let g = random_cylindrical(d, family, &mut rng)?;
        let mut modes = f.modes().to_vec();
        modes.extend(g.modes().iter().filter(|k| !f.modes().contains(k)).copied());
        let psi = random_direction(d, n, &modes, &mut rng)?;
        Ok((f, g, psi))
    }
}
