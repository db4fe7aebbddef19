//! Real-space evaluation of truncated fields on uniform grids.
//!
//! Transforms are pruned: along each axis only the lines that can carry
//! nonzero data (or that feed requested output modes) are transformed.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{check_dim, FieldShape, FourierField};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|plans| {
        plans
            .borrow_mut()
            .entry((len, inverse))
            .or_insert_with(|| {
                PLANNER.with(|p| {
                    let mut p = p.borrow_mut();
                    if inverse {
                        p.plan_fft_inverse(len)
                    } else {
                        p.plan_fft_forward(len)
                    }
                })
            })
            .clone()
    })
}

/// Smallest integer ≥ `min` of the form 2^a 3^b 5^c.
pub fn fast_grid_size(min: usize) -> usize {
    let mut g = min.max(1);
    loop {
        let mut m = g;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return g;
        }
        g += 1;
    }
}

/// A uniform grid of G points per axis on T^d with cached FFT plans.
#[derive(Clone)]
pub struct SpectralGrid {
    d: usize,
    g: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("d", &self.d)
            .field("g", &self.g)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(d: usize, g: usize) -> Result<Self> {
        check_dim(d)?;
        if g == 0 {
            return Err(Error::GridTooSmall { grid: 0, min: 1 });
        }
        Ok(Self {
            d,
            g,
            forward: plan(g, false),
            inverse: plan(g, true),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.g
    }

    pub fn len(&self) -> usize {
        self.g.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_modes(&self, n: usize) -> Result<()> {
        if self.g < 2 * n + 1 {
            return Err(Error::GridTooSmall {
                grid: self.g,
                min: 2 * n + 1,
            });
        }
        Ok(())
    }

    fn wrap(&self, c: i64) -> usize {
        c.rem_euclid(self.g as i64) as usize
    }

    /// Grid positions k mod G for k = −n..=n.
    fn active(&self, n: usize) -> Vec<usize> {
        (-(n as i64)..=n as i64).map(|c| self.wrap(c)).collect()
    }

    /// v[j] = Σ_k û(k) e^{2πi k·j/G}, flat row-major with j_0 most significant.
    pub fn synthesize(&self, u: &FourierField) -> Result<Vec<Complex64>> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        self.synthesize_into(u, &mut buf)?;
        Ok(buf)
    }

    pub fn synthesize_into(&self, u: &FourierField, buf: &mut [Complex64]) -> Result<()> {
        if u.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: u.d(),
            });
        }
        self.check_modes(u.n())?;
        assert_eq!(buf.len(), self.len());
        buf.fill(Complex64::new(0.0, 0.0));
        let active = self.active(u.n());
        let shape = u.shape();
        for (off, &c) in u.coeffs().iter().enumerate() {
            buf[self.grid_offset(&shape, off, &active)] = c;
        }
        for axis in (0..self.d).rev() {
            self.transform_axis(buf, axis, &active, &self.inverse);
        }
        Ok(())
    }

    /// û(k) = G^{−d} Σ_j v[j] e^{−2πi k·j/G} for |k|_∞ ≤ n. Consumes `buf`.
    pub fn analyze(&self, buf: &mut [Complex64], n: usize) -> Result<FourierField> {
        self.check_modes(n)?;
        assert_eq!(buf.len(), self.len());
        let active = self.active(n);
        for axis in 0..self.d {
            self.transform_axis(buf, axis, &active, &self.forward);
        }
        let shape = FieldShape::new(self.d, n)?;
        let norm = 1.0 / self.len() as f64;
        let coeffs = (0..shape.len())
            .map(|off| buf[self.grid_offset(&shape, off, &active)] * norm)
            .collect();
        FourierField::from_coeffs(self.d, n, coeffs)
    }

    /// Unnormalized full transform of grid data: forward uses e^{−2πi k·j/G},
    /// inverse e^{+2πi k·j/G}.
    pub fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len());
        let all: Vec<usize> = (0..self.g).collect();
        let fft = if inverse { &self.inverse } else { &self.forward };
        for axis in 0..self.d {
            self.transform_axis(buf, axis, &all, fft);
        }
    }

    /// Signed frequency of each flat grid position (per axis j ↦ j or j − G).
    pub fn frequency_of(&self, mut flat: usize) -> [i64; super::MAX_DIM] {
        let mut k = [0i64; super::MAX_DIM];
        for axis in (0..self.d).rev() {
            let j = (flat % self.g) as i64;
            flat /= self.g;
            k[axis] = if 2 * j <= self.g as i64 { j } else { j - self.g as i64 };
        }
        k
    }

    fn grid_offset(&self, shape: &FieldShape, off: usize, active: &[usize]) -> usize {
        let side = shape.side();
        let mut rem = off;
        let mut digits = [0usize; super::MAX_DIM];
        for axis in (0..self.d).rev() {
            digits[axis] = rem % side;
            rem /= side;
        }
        digits[..self.d]
            .iter()
            .fold(0usize, |acc, &dgt| acc * self.g + active[dgt])
    }

    /// 1D transforms along `axis` for all lines whose indices on earlier axes
    /// lie in `active`; later axes are processed in full.
    fn transform_axis(
        &self,
        buf: &mut [Complex64],
        axis: usize,
        active: &[usize],
        fft: &Arc<dyn Fft<f64>>,
    ) {
        let g = self.g;
        let inner = g.pow((self.d - 1 - axis) as u32);
        let block = g * inner;
        let mut outers = vec![0usize];
        for _ in 0..axis {
            outers = outers
                .iter()
                .flat_map(|&o| active.iter().map(move |&a| o * g + a))
                .collect();
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        if inner == 1 {
            for &o in &outers {
                fft.process_with_scratch(&mut buf[o * block..(o + 1) * block], &mut scratch);
            }
            return;
        }
        let mut tmp = vec![Complex64::new(0.0, 0.0); block];
        for &o in &outers {
            let sub = &mut buf[o * block..(o + 1) * block];
            for i in 0..g {
                for c in 0..inner {
                    tmp[c * g + i] = sub[i * inner + c];
                }
            }
            fft.process_with_scratch(&mut tmp, &mut scratch);
            for i in 0..g {
                for c in 0..inner {
                    sub[i * inner + c] = tmp[c * g + i];
                }
            }
        }
    }
}

/// Values of u at the grid points x = j/G, G points per axis.
pub fn to_real_space(u: &FourierField, g: usize) -> Result<Vec<Complex64>> {
    let min = 2 * u.n() + 2;
    if g < min {
        return Err(Error::GridTooSmall { grid: g, min });
    }
    SpectralGrid::new(u.d(), g)?.synthesize(u)
}

/// Quadrature Fourier coefficients |k|_∞ ≤ n of grid values `v`.
pub fn from_real_space(v: &[Complex64], d: usize, g: usize, n: usize) -> Result<FourierField> {
    let min = 2 * n + 2;
    if g < min {
        return Err(Error::GridTooSmall { grid: g, min });
    }
    let grid = SpectralGrid::new(d, g)?;
    if v.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} grid values, got {}",
            grid.len(),
            v.len()
        )));
    }
    let mut buf = v.to_vec();
    grid.analyze(&mut buf, n)
}
