//! Independent oracles shared by the integration and acceptance tests. Nothing
//! here goes through the FFT path of the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use spectral_gibbs::fourier_field::{FieldShape, FourierField, LatticeIndex};
use spectral_gibbs::observables::Potential;

/// Grid points x_j = j/G as flat row-major multi-indices.
fn grid_points(d: usize, g: usize) -> Vec<[f64; 3]> {
    let total = g.pow(d as u32);
    (0..total)
        .map(|mut flat| {
            let mut x = [0.0; 3];
            for axis in (0..d).rev() {
                x[axis] = (flat % g) as f64 / g as f64;
                flat /= g;
            }
            x
        })
        .collect()
}

/// u(x) by direct summation over the modes.
pub fn direct_values(u: &FourierField, g: usize) -> Vec<Complex64> {
    let d = u.d();
    let modes: Vec<(LatticeIndex, Complex64)> = u.iter().collect();
    grid_points(d, g)
        .iter()
        .map(|x| {
            modes
                .iter()
                .map(|(k, c)| {
                    let ph: f64 = k
                        .components()
                        .iter()
                        .zip(x)
                        .map(|(&ki, &xi)| ki as f64 * xi)
                        .sum::<f64>()
                        * 2.0
                        * PI;
                    c * Complex64::from_polar(1.0, ph)
                })
                .sum()
        })
        .collect()
}

/// V(x_j) = Σ_{|k|_∞ ≤ m} V̂(k) e^{2πik·x_j}, real because V̂ is even.
pub fn direct_potential(v: &Potential, m: usize, g: usize) -> Vec<f64> {
    let d = v.d();
    let shape = FieldShape::new(d, m).unwrap();
    let modes: Vec<(Vec<i32>, f64)> = shape
        .indices()
        .map(|k| (k.components().to_vec(), v.coefficient(&k)))
        .filter(|(_, c)| *c != 0.0)
        .collect();
    grid_points(d, g)
        .iter()
        .map(|x| {
            modes
                .iter()
                .map(|(k, c)| {
                    let ph: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum::<f64>() * 2.0 * PI;
                    c * ph.cos()
                })
                .sum()
        })
        .collect()
}

/// ¼ ∫∫ (|u(x)|² − c) V(x−y) (|u(y)|² − c) dx dy by double quadrature on a
/// grid of G ≥ 4n+1 points per axis.
pub fn double_quadrature_hartree(u: &FourierField, v: &Potential, shift: f64, g: usize) -> f64 {
    let d = u.d();
    let vals = direct_values(u, g);
    let rho: Vec<f64> = vals.iter().map(|z| z.norm_sqr() - shift).collect();
    let vx = direct_potential(v, 2 * u.n(), g);
    let total = g.pow(d as u32);
    let digits = |mut flat: usize| {
        let mut j = [0usize; 3];
        for axis in (0..d).rev() {
            j[axis] = flat % g;
            flat /= g;
        }
        j
    };
    let all: Vec<[usize; 3]> = (0..total).map(digits).collect();
    let mut sum = 0.0;
    for (a, ja) in all.iter().enumerate() {
        let mut inner = 0.0;
        for (b, jb) in all.iter().enumerate() {
            let mut diff = 0usize;
            for axis in 0..d {
                diff = diff * g + (ja[axis] + g - jb[axis]) % g;
            }
            inner += vx[diff] * rho[b];
        }
        sum += rho[a] * inner;
    }
    0.25 * sum / (total as f64 * total as f64)
}

/// A random field with O(1) coefficients decaying like ⟨k⟩^{-1}.
pub fn random_field(d: usize, n: usize, rng: &mut impl Rng, amplitude: f64) -> FourierField {
    FourierField::from_fn(d, n, |k| {
        let b = (4.0 * PI * PI * k.norm_sq() + 1.0).sqrt();
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (amplitude / b)
    })
    .unwrap()
}

/// Central difference of `f` along the coordinate (offset, real/imag).
pub fn central_difference(
    f: &dyn Fn(&FourierField) -> f64,
    u: &FourierField,
    offset: usize,
    imaginary: bool,
    h: f64,
) -> f64 {
    let dir = if imaginary {
        Complex64::new(0.0, h)
    } else {
        Complex64::new(h, 0.0)
    };
    let mut up = u.clone();
    up.coeffs_mut()[offset] += dir;
    let mut dn = u.clone();
    dn.coeffs_mut()[offset] -= dir;
    (f(&up) - f(&dn)) / (2.0 * h)
}
