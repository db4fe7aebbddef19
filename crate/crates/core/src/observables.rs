//! Energies, renormalized mass and interaction gradients at fixed truncation.
//!
//! The gradient of a real functional F is the field ∇F with
//! dF(u)[h] = Re⟨∇F(u), h⟩ for every direction h, i.e. ∂F/∂a_k + i ∂F/∂b_k in
//! the coordinates û(k) = a_k + i b_k.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier_field::{
    check_dim, fast_grid_size, FieldShape, FourierField, LatticeIndex, SpectralGrid,
};

/// Real, even Fourier coefficients V̂(k) on the cube |k|_∞ ≤ n_V.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    shape: FieldShape,
    values: Vec<f64>,
}

impl Potential {
    /// V̂(k) = v0 (1 + |k|)^{−β} with β = ε for d = 1, 2 and β = 2 + ε for d = 3.
    pub fn parametric(d: usize, n_v: usize, v0: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("decay exponent must lie in (0,1), got {eps}")));
        }
        let beta = if d == 3 { 2.0 + eps } else { eps };
        let shape = FieldShape::new(d, n_v)?;
        let values = shape
            .indices()
            .map(|k| v0 * (1.0 + k.norm_sq().sqrt()).powf(-beta))
            .collect();
        Ok(Self { shape, values })
    }

    pub fn zero(d: usize, n_v: usize) -> Result<Self> {
        let shape = FieldShape::new(d, n_v)?;
        Ok(Self {
            shape,
            values: vec![0.0; shape.len()],
        })
    }

    /// Builds a potential from (k, V̂(k)) entries. Missing mirror entries are
    /// filled by evenness; contradicting mirrors are rejected.
    pub fn from_entries(d: usize, entries: &[(Vec<i32>, f64)]) -> Result<Self> {
        let n_v = entries
            .iter()
            .flat_map(|(k, _)| k.iter().map(|c| c.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        let shape = FieldShape::new(d, n_v)?;
        let mut values = vec![0.0; shape.len()];
        let mut explicit = vec![false; shape.len()];
        for (k, v) in entries {
            if k.len() != d {
                return Err(Error::Parse(format!("index {k:?} does not have {d} components")));
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite potential value at {k:?}")));
            }
            let idx = LatticeIndex::new(k)?;
            let off = shape.offset(&idx).expect("inside cube");
            let mirror = shape.offset(&-idx).expect("inside cube");
            if explicit[off] {
                return Err(Error::Parse(format!("duplicate entry for {k:?}")));
            }
            if explicit[mirror] && (values[mirror] - v).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(Error::Parse(format!("potential is not even at {k:?}")));
            }
            values[off] = *v;
            explicit[off] = true;
            if !explicit[mirror] {
                values[mirror] = *v;
            }
        }
        Ok(Self { shape, values })
    }

    /// CSV rows `k_1,...,k_d,value`; blank lines, `#` comments and a
    /// non-numeric header row are skipped.
    pub fn from_csv(d: usize, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if lineno == 0 && cols[0].parse::<i32>().is_err() {
                continue;
            }
            if cols.len() != d + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    d + 1,
                    cols.len()
                )));
            }
            let k = cols[..d]
                .iter()
                .map(|c| c.parse::<i32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let v = cols[d]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            entries.push((k, v));
        }
        Self::from_entries(d, &entries)
    }

    pub fn d(&self) -> usize {
        self.shape.d()
    }

    pub fn n_v(&self) -> usize {
        self.shape.n()
    }

    /// V̂(k), zero outside the stored cube.
    pub fn coefficient(&self, k: &LatticeIndex) -> f64 {
        self.shape.offset(k).map_or(0.0, |i| self.values[i])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Which interaction h^I is in force.
#[derive(Debug, Clone, PartialEq)]
pub enum InteractionSpec {
    /// No interaction, h^I ≡ 0 (any dimension).
    Off,
    /// (1/(r+1)) ∫|u|^{r+1}, r ∈ {3, 5}, d = 1.
    LocalPower { r: u32 },
    /// ¼ ∫∫ |u(x)|² V(x−y) |u(y)|², d = 1.
    Hartree1D(Potential),
    /// ¼ ∫∫ :|u(x)|²: V(x−y) :|u(y)|²:, d = 2, 3.
    WickHartree(Potential),
    /// (1/6) ∫ (V∗|u|²)² |u|², d = 1.
    NonlocalQuintic(Potential),
}

impl InteractionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Off => "off",
            Self::LocalPower { .. } => "local-power",
            Self::Hartree1D(_) => "hartree-1d",
            Self::WickHartree(_) => "wick-hartree",
            Self::NonlocalQuintic(_) => "nonlocal-quintic",
        }
    }

    pub fn potential(&self) -> Option<&Potential> {
        match self {
            Self::Hartree1D(v) | Self::WickHartree(v) | Self::NonlocalQuintic(v) => Some(v),
            _ => None,
        }
    }

    /// Checks the dimension constraints and the potential coverage for cutoff n.
    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        check_dim(d)?;
        let ok = match self {
            Self::Off => true,
            Self::LocalPower { r } => {
                if *r != 3 && *r != 5 {
                    return Err(Error::InvalidParameter(format!("power r must be 3 or 5, got {r}")));
                }
                d == 1
            }
            Self::Hartree1D(_) | Self::NonlocalQuintic(_) => d == 1,
            Self::WickHartree(_) => d >= 2,
        };
        if !ok {
            return Err(Error::InteractionDimension { variant: self.name(), d });
        }
        if let Some(v) = self.potential() {
            if v.d() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.d() });
            }
            if v.n_v() < 2 * n {
                return Err(Error::PotentialTooSmall { n_v: v.n_v(), needed: 2 * n });
            }
        }
        Ok(())
    }
}

/// σ_n = Σ_{|k|_∞ ≤ n} ⟨k⟩^{−2}.
pub fn sigma_n(d: usize, n: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("sigma cache").get(&(d, n)) {
        return Ok(*v);
    }
    let v = sigma_sum(d, n)?;
    cache.lock().expect("sigma cache").insert((d, n), v);
    Ok(v)
}

fn sigma_sum(d: usize, n: usize) -> Result<f64> {
    let shape = FieldShape::new(d, n)?;
    // Sum over the first axis in closed loops for the inner ones.
    let c = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let n = n as i64;
    let sq: Vec<f64> = (-n..=n).map(|j| (j * j) as f64).collect();
    let total = match shape.d() {
        1 => sq.iter().map(|a| 1.0 / (c * a + 1.0)).sum(),
        2 => sq
            .iter()
            .map(|a| sq.iter().map(|b| 1.0 / (c * (a + b) + 1.0)).sum::<f64>())
            .sum(),
        _ => sq
            .iter()
            .map(|a| {
                sq.iter()
                    .map(|b| sq.iter().map(|e| 1.0 / (c * (a + b + e) + 1.0)).sum::<f64>())
                    .sum::<f64>()
            })
            .sum(),
    };
    Ok(total)
}

/// Σ_{|k|_∞ ≤ n} ⟨k⟩^{−4}.
pub fn sigma4_n(d: usize, n: usize) -> Result<f64> {
    let shape = FieldShape::new(d, n)?;
    Ok(shape
        .indices()
        .map(|k| (4.0 * std::f64::consts::PI.powi(2) * k.norm_sq() + 1.0).powi(-2))
        .sum())
}

/// Renormalized mass: Σ|û(k)|² − σ_n for d = 2, 3 and the plain mass for d = 1.
pub fn wick_mass(u: &FourierField) -> f64 {
    if u.d() == 1 {
        u.norm_sq()
    } else {
        u.norm_sq() - sigma_n(u.d(), u.n()).expect("valid shape")
    }
}

/// Wick mass with a precomputed σ_n.
pub fn wick_mass_with(u: &FourierField, sigma: f64) -> f64 {
    if u.d() == 1 {
        u.norm_sq()
    } else {
        u.norm_sq() - sigma
    }
}

/// ∇M(u) = 2u.
pub fn mass_gradient(u: &FourierField) -> FourierField {
    u.scale(2.0)
}

/// h0(u) = ½ Σ ⟨k⟩² |û(k)|².
pub fn free_energy(u: &FourierField) -> f64 {
    0.5 * u
        .iter()
        .map(|(k, c)| (4.0 * std::f64::consts::PI.powi(2) * k.norm_sq() + 1.0) * c.norm_sqr())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Off,
    Local(u32),
    Convolution { wick: bool, quintic: bool },
}

/// Dealiased evaluator of h^I and ∇h^I for a fixed (d, n, interaction).
///
/// Pointwise products are formed on a grid large enough that every quadrature
/// and every projected product is exact for the truncated trigonometric
/// polynomials involved.
#[derive(Debug, Clone)]
pub struct InteractionEvaluator {
    spec: InteractionSpec,
    shape: FieldShape,
    kind: Kind,
    grid: SpectralGrid,
    vmask: Vec<f64>,
    sigma: f64,
}

impl InteractionEvaluator {
    pub fn new(spec: &InteractionSpec, d: usize, n: usize) -> Result<Self> {
        spec.validate(d, n)?;
        let shape = FieldShape::new(d, n)?;
        let (kind, min_grid) = match spec {
            InteractionSpec::Off => (Kind::Off, 2 * n + 1),
            InteractionSpec::LocalPower { r } => (Kind::Local(*r), (*r as usize + 1) * n + 1),
            InteractionSpec::Hartree1D(_) => (Kind::Convolution { wick: false, quintic: false }, 4 * n + 1),
            InteractionSpec::WickHartree(_) => (Kind::Convolution { wick: true, quintic: false }, 4 * n + 1),
            InteractionSpec::NonlocalQuintic(_) => {
                (Kind::Convolution { wick: false, quintic: true }, 6 * n + 1)
            }
        };
        let grid = SpectralGrid::new(d, fast_grid_size(min_grid))?;
        let vmask = match spec.potential() {
            Some(v) => {
                let two_n = 2 * n as i64;
                (0..grid.len())
                    .map(|flat| {
                        let f = grid.frequency_of(flat);
                        let f = &f[..d];
                        if f.iter().all(|c| c.abs() <= two_n) {
                            let comps: Vec<i32> = f.iter().map(|&c| c as i32).collect();
                            v.coefficient(&LatticeIndex::new(&comps).expect("valid dim"))
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            None => Vec::new(),
        };
        let sigma = sigma_n(d, n)?;
        Ok(Self {
            spec: spec.clone(),
            shape,
            kind,
            grid,
            vmask,
            sigma,
        })
    }

    pub fn spec(&self) -> &InteractionSpec {
        &self.spec
    }

    pub fn shape(&self) -> FieldShape {
        self.shape
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn wick_mass(&self, u: &FourierField) -> f64 {
        wick_mass_with(u, self.sigma)
    }

    fn check(&self, u: &FourierField) -> Result<()> {
        if u.d() != self.shape.d() {
            return Err(Error::DimensionMismatch {
                expected: self.shape.d(),
                found: u.d(),
            });
        }
        if u.n() != self.shape.n() {
            return Err(Error::ShapeMismatch {
                left: (self.shape.d(), self.shape.n()),
                right: (u.d(), u.n()),
            });
        }
        Ok(())
    }

    pub fn energy(&self, u: &FourierField) -> Result<f64> {
        Ok(self.evaluate(u, false)?.0)
    }

    pub fn gradient(&self, u: &FourierField) -> Result<FourierField> {
        Ok(self.evaluate(u, true)?.1.expect("gradient requested"))
    }

    pub fn energy_and_gradient(&self, u: &FourierField) -> Result<(f64, FourierField)> {
        let (e, g) = self.evaluate(u, true)?;
        Ok((e, g.expect("gradient requested")))
    }

    /// The real function W on the grid with ∇h^I(u) = P_n[W u], together with
    /// the grid values of u.
    pub fn multiplier_on_grid(&self, u: &FourierField) -> Result<(Vec<f64>, Vec<Complex64>)> {
        self.check(u)?;
        let ug = self.grid.synthesize(u)?;
        let (_, w) = self.energy_and_multiplier(&ug, true);
        Ok((w.unwrap_or_else(|| vec![0.0; ug.len()]), ug))
    }

    fn evaluate(&self, u: &FourierField, want_grad: bool) -> Result<(f64, Option<FourierField>)> {
        self.check(u)?;
        if self.kind == Kind::Off {
            let g = want_grad.then(|| FourierField::zeros_like_shape(self.shape));
            return Ok((0.0, g));
        }
        let ug = self.grid.synthesize(u)?;
        let (energy, w) = self.energy_and_multiplier(&ug, want_grad);
        let grad = match w {
            Some(w) => {
                let mut prod: Vec<Complex64> = ug.iter().zip(&w).map(|(z, w)| z * w).collect();
                Some(self.grid.analyze(&mut prod, self.shape.n())?)
            }
            None => None,
        };
        Ok((energy, grad))
    }

    fn convolve(&self, buf: &mut [Complex64]) -> Vec<f64> {
        // buf holds Fourier coefficients (normalized); returns V∗· on the grid
        for (z, v) in buf.iter_mut().zip(&self.vmask) {
            *z *= v;
        }
        self.grid.transform(buf, true);
        buf.iter().map(|z| z.re).collect()
    }

    fn energy_and_multiplier(&self, ug: &[Complex64], want_w: bool) -> (f64, Option<Vec<f64>>) {
        let len = ug.len() as f64;
        let rho: Vec<f64> = ug.iter().map(|z| z.norm_sqr()).collect();
        match self.kind {
            Kind::Off => (0.0, want_w.then(|| vec![0.0; ug.len()])),
            Kind::Local(r) => {
                let half = (r as i32 - 1) / 2;
                let mut energy = 0.0;
                let mut w = Vec::with_capacity(if want_w { ug.len() } else { 0 });
                for &p in &rho {
                    let p_half = p.powi(half);
                    energy += p_half * p;
                    if want_w {
                        w.push(p_half);
                    }
                }
                (energy / len / (r as f64 + 1.0), want_w.then_some(w))
            }
            Kind::Convolution { wick, quintic } => {
                let mut rho_hat: Vec<Complex64> = rho.iter().map(|&p| Complex64::new(p / len, 0.0)).collect();
                self.grid.transform(&mut rho_hat, false);
                if wick {
                    rho_hat[0] -= self.sigma;
                }
                let hartree: f64 = rho_hat
                    .iter()
                    .zip(&self.vmask)
                    .map(|(z, v)| v * z.norm_sqr())
                    .sum::<f64>()
                    * 0.25;
                if !quintic && !want_w {
                    return (hartree, None);
                }
                let w = self.convolve(&mut rho_hat);
                if !quintic {
                    return (hartree, Some(w));
                }
                let energy = w.iter().zip(&rho).map(|(w, p)| w * w * p).sum::<f64>() / len / 6.0;
                if !want_w {
                    return (energy, None);
                }
                let mut q: Vec<Complex64> = w
                    .iter()
                    .zip(&rho)
                    .map(|(w, p)| Complex64::new(w * p / len, 0.0))
                    .collect();
                self.grid.transform(&mut q, false);
                let vq = self.convolve(&mut q);
                let total = w
                    .iter()
                    .zip(&vq)
                    .map(|(w, vq)| w * w / 3.0 + 2.0 * vq / 3.0)
                    .collect();
                (energy, Some(total))
            }
        }
    }
}

/// h^I(u) for the given interaction.
pub fn interaction_energy(u: &FourierField, spec: &InteractionSpec) -> Result<f64> {
    InteractionEvaluator::new(spec, u.d(), u.n())?.energy(u)
}

/// ∇h^I(u), projected onto the truncation of u.
pub fn interaction_gradient(u: &FourierField, spec: &InteractionSpec) -> Result<FourierField> {
    InteractionEvaluator::new(spec, u.d(), u.n())?.gradient(u)
}

/// h(u) = h0(u) − h^I(u).
pub fn full_hamiltonian(u: &FourierField, spec: &InteractionSpec) -> Result<f64> {
    Ok(free_energy(u) - interaction_energy(u, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_field::{sample_free_field, SeedPolicy};
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn specs_for(n: usize) -> Vec<(usize, InteractionSpec)> {
        vec![
            (1, InteractionSpec::LocalPower { r: 3 }),
            (1, InteractionSpec::LocalPower { r: 5 }),
            (1, InteractionSpec::Hartree1D(Potential::parametric(1, 2 * n, 1.0, 0.5).unwrap())),
            (2, InteractionSpec::WickHartree(Potential::parametric(2, 2 * n, 1.0, 0.5).unwrap())),
            (3, InteractionSpec::WickHartree(Potential::parametric(3, 2 * n, 1.0, 0.5).unwrap())),
            (1, InteractionSpec::NonlocalQuintic(Potential::parametric(1, 2 * n, 0.7, 0.3).unwrap())),
        ]
    }

    #[test]
    fn sigma_small_cases() {
        assert_eq!(sigma_n(2, 0).unwrap(), 1.0);
        let c = 4.0 * std::f64::consts::PI.powi(2);
        let expected = 1.0 + 2.0 / (c + 1.0);
        assert!((sigma_n(1, 1).unwrap() - expected).abs() < 1e-15);
        let direct: f64 = FieldShape::new(3, 3)
            .unwrap()
            .indices()
            .map(|k| 1.0 / (c * k.norm_sq() + 1.0))
            .sum();
        assert!((sigma_n(3, 3).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn sigma_growth_rates() {
        let ratio3 = sigma_n(3, 64).unwrap() / sigma_n(3, 32).unwrap();
        assert!((1.7..=2.3).contains(&ratio3), "{ratio3}");
        // d=2: σ_n = ln(n)/(2π) + C + o(1), so σ_{n²} − σ_n ≈ ln(n)/(2π).
        // The bare ratio σ_{n²}/σ_n only reaches 2 once ln n dominates C.
        let n = 32usize;
        let inc = sigma_n(2, n * n).unwrap() - sigma_n(2, n).unwrap();
        let rate = inc / ((n as f64).ln() / (2.0 * std::f64::consts::PI));
        assert!((rate - 1.0).abs() < 0.02, "{rate}");
        let ratio2 = sigma_n(2, n * n).unwrap() / sigma_n(2, n).unwrap();
        assert!((ratio2 - 1.336_251_214_911).abs() < 1e-9, "{ratio2}");
    }

    #[test]
    fn wick_mass_examples() {
        let s2 = sigma_n(2, 4).unwrap();
        assert!((wick_mass(&FourierField::zeros(2, 4).unwrap()) + s2).abs() < 1e-14);
        let k0 = LatticeIndex::new(&[1, 0, -1]).unwrap();
        let u = FourierField::single_mode(3, 2, &k0, c(0.5, 1.5)).unwrap();
        assert!((wick_mass(&u) - (2.5 - sigma_n(3, 2).unwrap())).abs() < 1e-13);
        let u1 = FourierField::single_mode(1, 2, &LatticeIndex::zero(1).unwrap(), c(2.0, 0.0)).unwrap();
        assert_eq!(wick_mass(&u1), 4.0);
    }

    #[test]
    fn free_energy_examples() {
        let k0 = LatticeIndex::new(&[2, 1]).unwrap();
        let u = FourierField::single_mode(2, 3, &k0, c(0.3, 0.4)).unwrap();
        let b2 = crate::fourier_field::japanese_bracket(&k0).powi(2);
        assert!((free_energy(&u) - 0.5 * b2 * 0.25).abs() < 1e-13);
        let v = sample_free_field(3, 3, &SeedPolicy::new(1), 0).unwrap();
        let s = crate::fourier_field::sobolev_norm(&v, 1.0);
        assert!((free_energy(&v) - 0.5 * s * s).abs() < 1e-12 * free_energy(&v));
    }

    #[test]
    fn zero_potential_gives_zero() {
        for (d, spec) in [
            (1, InteractionSpec::Hartree1D(Potential::zero(1, 8).unwrap())),
            (2, InteractionSpec::WickHartree(Potential::zero(2, 8).unwrap())),
            (1, InteractionSpec::NonlocalQuintic(Potential::zero(1, 8).unwrap())),
        ] {
            let u = sample_free_field(d, 4, &SeedPolicy::new(2), 0).unwrap();
            assert_eq!(interaction_energy(&u, &spec).unwrap(), 0.0);
            assert_eq!(interaction_gradient(&u, &spec).unwrap().norm_sq(), 0.0);
        }
    }

    #[test]
    fn wick_hartree_at_zero_field() {
        let v = Potential::parametric(2, 10, 1.3, 0.5).unwrap();
        let spec = InteractionSpec::WickHartree(v);
        let u = FourierField::zeros(2, 5).unwrap();
        let s = sigma_n(2, 5).unwrap();
        let e = interaction_energy(&u, &spec).unwrap();
        assert!((e - 0.25 * 1.3 * s * s).abs() < 1e-12 * e);
        assert_eq!(interaction_gradient(&u, &spec).unwrap().norm_sq(), 0.0);
    }

    #[test]
    fn constant_field_local_power() {
        let cst = c(0.6, -0.8) * 1.3;
        let u = FourierField::single_mode(1, 3, &LatticeIndex::zero(1).unwrap(), cst).unwrap();
        let spec = InteractionSpec::LocalPower { r: 3 };
        let m = cst.norm_sqr();
        assert!((interaction_energy(&u, &spec).unwrap() - m * m / 4.0).abs() < 1e-14);
        let g = interaction_gradient(&u, &spec).unwrap();
        let expected = FourierField::single_mode(1, 3, &LatticeIndex::zero(1).unwrap(), cst * m).unwrap();
        assert!(g.sub(&expected).unwrap().norm_sq().sqrt() < 1e-14);
    }

    #[test]
    fn dimension_and_coverage_errors() {
        let v2 = Potential::parametric(2, 8, 1.0, 0.5).unwrap();
        let u1 = FourierField::zeros(1, 2).unwrap();
        assert!(matches!(
            interaction_energy(&u1, &InteractionSpec::WickHartree(v2.clone())),
            Err(Error::InteractionDimension { .. })
        ));
        let u2 = FourierField::zeros(2, 5).unwrap();
        assert!(matches!(
            interaction_energy(&u2, &InteractionSpec::WickHartree(v2)),
            Err(Error::PotentialTooSmall { n_v: 8, needed: 10 })
        ));
        let u3 = FourierField::zeros(3, 1).unwrap();
        assert!(interaction_energy(&u3, &InteractionSpec::LocalPower { r: 3 }).is_err());
        assert!(InteractionSpec::LocalPower { r: 4 }.validate(1, 2).is_err());
    }

    #[test]
    fn hamiltonian_composes() {
        let (d, spec) = specs_for(3).remove(3);
        let u = sample_free_field(d, 3, &SeedPolicy::new(4), 1).unwrap();
        let h = full_hamiltonian(&u, &spec).unwrap();
        assert!((h - (free_energy(&u) - interaction_energy(&u, &spec).unwrap())).abs() < 1e-12);
        assert_eq!(full_hamiltonian(&u, &InteractionSpec::Off).unwrap(), free_energy(&u));
    }

    #[test]
    fn potential_csv_round_trip() {
        let text = "k,v\n0,2.0\n1,0.5\n-2,0.25\n# trailing\n";
        let v = Potential::from_csv(1, text).unwrap();
        assert_eq!(v.n_v(), 2);
        assert_eq!(v.coefficient(&LatticeIndex::new(&[-1]).unwrap()), 0.5);
        assert_eq!(v.coefficient(&LatticeIndex::new(&[2]).unwrap()), 0.25);
        assert!(Potential::from_csv(1, "1,0.5\n-1,0.7\n").is_err());
        assert!(Potential::from_csv(2, "1,0.5\n").is_err());
    }

    #[test]
    fn mass_gradient_by_differences() {
        let mut rng = SeedPolicy::new(8).rng(0);
        let u = sample_free_field(2, 3, &SeedPolicy::new(8), 1).unwrap();
        let g = mass_gradient(&u);
        let h = 1e-5;
        for _ in 0..20 {
            let off = rng.gen_range(0..u.coeffs().len());
            let imag = rng.gen_bool(0.5);
            let dir = if imag { c(0.0, 1.0) } else { c(1.0, 0.0) };
            let mut up = u.clone();
            up.coeffs_mut()[off] += dir * h;
            let mut dn = u.clone();
            dn.coeffs_mut()[off] -= dir * h;
            let fd = (wick_mass(&up) - wick_mass(&dn)) / (2.0 * h);
            let exact = if imag { g.coeffs()[off].im } else { g.coeffs()[off].re };
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3));
        }
    }

    #[test]
    fn multiplier_reproduces_gradient() {
        for (d, spec) in specs_for(3) {
            let ev = InteractionEvaluator::new(&spec, d, 3).unwrap();
            let u = sample_free_field(d, 3, &SeedPolicy::new(6), 0).unwrap();
            let (w, ug) = ev.multiplier_on_grid(&u).unwrap();
            let mut prod: Vec<Complex64> = ug.iter().zip(&w).map(|(z, w)| z * w).collect();
            let g = ev.grid().analyze(&mut prod, 3).unwrap();
            let exact = ev.gradient(&u).unwrap();
            assert!(g.sub(&exact).unwrap().norm_sq().sqrt() < 1e-12 * exact.norm_sq().sqrt().max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gauge_invariance(seed in 0u64..1000, theta in 0.0f64..6.3) {
            let phase = Complex64::from_polar(1.0, theta);
            for (d, spec) in specs_for(2) {
                let u = sample_free_field(d, 2, &SeedPolicy::new(seed), 0).unwrap();
                let v = u.scale_complex(phase);
                let e_u = interaction_energy(&u, &spec).unwrap();
                let e_v = interaction_energy(&v, &spec).unwrap();
                prop_assert!((e_u - e_v).abs() <= 1e-12 * e_u.abs().max(1.0));
                prop_assert!((wick_mass(&u) - wick_mass(&v)).abs() <= 1e-12 * wick_mass(&u).abs().max(1.0));
                prop_assert!((free_energy(&u) - free_energy(&v)).abs() <= 1e-12 * free_energy(&u));
            }
        }

        #[test]
        fn gradient_orthogonal_to_phase_rotation(seed in 0u64..1000) {
            for (d, spec) in specs_for(2) {
                let u = sample_free_field(d, 2, &SeedPolicy::new(seed), 1).unwrap().scale(3.0);
                let g = interaction_gradient(&u, &spec).unwrap();
                let iu = u.scale_complex(Complex64::new(0.0, 1.0));
                let dot = g.real_inner(&iu).unwrap();
                let scale = g.norm_sq().sqrt() * u.norm_sq().sqrt();
                prop_assert!(dot.abs() <= 1e-10 * scale.max(1.0), "{} {}", spec.name(), dot);
            }
        }

        #[test]
        fn energy_is_real_in_fourier_form(seed in 0u64..1000) {
            // ¼ Σ V̂(k) ρ̂(k) ρ̂(−k) must have vanishing imaginary part
            let n = 2usize;
            let v = Potential::parametric(2, 2 * n, 1.0, 0.5).unwrap();
            let u = sample_free_field(2, n, &SeedPolicy::new(seed), 2).unwrap();
            let rho = |k: [i32; 2]| -> Complex64 {
                let mut s = Complex64::new(0.0, 0.0);
                for (j, a) in u.iter() {
                    let jc = j.components();
                    let l = LatticeIndex::new(&[jc[0] - k[0], jc[1] - k[1]]).unwrap();
                    s += a * u.get(&l).conj();
                }
                s
            };
            let mut total = Complex64::new(0.0, 0.0);
            let m = 2 * n as i32;
            for a in -m..=m {
                for b in -m..=m {
                    let k = LatticeIndex::new(&[a, b]).unwrap();
                    total += v.coefficient(&k) * rho([a, b]) * rho([-a, -b]);
                }
            }
            prop_assert!(total.im.abs() <= 1e-12 * total.re.abs().max(1.0));
        }
    }
}
