//! Periodic lattice grids, real fields on them, and the h-weighted discrete
//! Fourier transform.
//!
//! A grid has n points (power of two) at spacing h, period L = n·h. Its dual
//! grid is ξ_k = 2πk/L for k ∈ [-n/2, n/2), which fills the Brillouin zone
//! [-π/h, π/h). Spectra are stored in fft-natural order (k = 0, 1, ...,
//! n/2-1, -n/2, ..., -1); `Spectrum::sorted` gives a ξ-ascending view.
//!
//! Conventions: forward transform coeffs(ξ) = h·Σ_m f(hm) e^{-i h m ξ},
//! inverse f(hm) = (1/L)·Σ_k coeffs(ξ_k) e^{+i h m ξ_k}.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Spacing, point count and shared transform plans for one periodic lattice.
#[derive(Clone)]
pub struct LatticeGrid {
    h: f64,
    n: usize,
    xi: Arc<Vec<f64>>,
    plans: Arc<Plans>,
}

impl fmt::Debug for LatticeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeGrid")
            .field("h", &self.h)
            .field("n", &self.n)
            .finish()
    }
}

impl LatticeGrid {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("spacing h = {h} must be positive")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("point count n = {n} must be a power of two >= 4")));
        }
        let period = h * n as f64;
        let dxi = 2.0 * std::f64::consts::PI / period;
        let xi = (0..n)
            .map(|j| {
                let k = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                dxi * k as f64
            })
            .collect();
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self { h, n, xi: Arc::new(xi), plans: Arc::new(plans) })
    }

    /// Grid for the given period: n = L/h points.
    pub fn with_period(h: f64, period: f64) -> Result<Self> {
        let n = (period / h).round() as usize;
        if ((n as f64) * h - period).abs() > 1e-9 * period {
            return Err(Error::InvalidConfig(format!("period {period} is not an integer multiple of h = {h}")));
        }
        Self::new(h, n)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.h * self.n as f64
    }

    /// Dual frequencies in fft-natural order.
    #[inline]
    pub fn frequencies(&self) -> &[f64] {
        &self.xi
    }

    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        self.xi[j]
    }

    /// Lattice points x_m = m·h.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |m| self.h * m as f64)
    }

    pub fn same_as(&self, other: &LatticeGrid) -> bool {
        self.h == other.h && self.n == other.n
    }

    pub fn check_same(&self, other: &LatticeGrid, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: (h={}, n={}) vs (h={}, n={})",
                self.h, self.n, other.h, other.n
            )))
        }
    }

    /// In-place forward transform of a complex buffer, h-weighted.
    pub fn dft_forward_buf(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.plans.forward.process(buf);
        for c in buf.iter_mut() {
            *c *= self.h;
        }
    }

    /// In-place inverse transform of a complex buffer, 1/L-normalized.
    pub fn dft_inverse_buf(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.plans.inverse.process(buf);
        let scale = 1.0 / self.period();
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }
}

/// Real-valued samples f(hm) on a lattice grid.
#[derive(Clone, Debug)]
pub struct LatticeField {
    pub grid: LatticeGrid,
    pub values: Vec<f64>,
}

impl LatticeField {
    pub fn new(grid: LatticeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidConfig(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("lattice field".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn constant(grid: LatticeGrid, c: f64) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n] }
    }

    pub fn from_fn(grid: LatticeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    /// ‖f‖_{L²(hZ)} = (h Σ |f|²)^{1/2}
    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "field addition")?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "field subtraction")?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Circular shift by `sites` lattice sites: result(x) = f(x - sites·h).
    pub fn shift_sites(&self, sites: i64) -> Self {
        let n = self.n() as i64;
        let values = (0..n)
            .map(|m| self.values[(m - sites).rem_euclid(n) as usize])
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    #[inline]
    fn n(&self) -> usize {
        self.values.len()
    }
}

/// Complex Fourier coefficients indexed by the dual grid (natural order).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: LatticeGrid,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: LatticeGrid) -> Self {
        let n = grid.len();
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// ‖·‖_{L²(hZ)} of the underlying field, evaluated by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (sum / self.grid.period()).sqrt()
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// (ξ, coeff) pairs sorted by ascending ξ.
    pub fn sorted(&self) -> Vec<(f64, Complex64)> {
        let n = self.grid.len();
        let mut out = Vec::with_capacity(n);
        for j in (n / 2..n).chain(0..n / 2) {
            out.push((self.grid.xi(j), self.coeffs[j]));
        }
        out
    }

    /// Checks the zero-mode mass against the 1e-12·‖f‖ gate used by the
    /// inverse-symbol operations. |coeffs(0)| ≤ √L·‖f‖ by Cauchy-Schwarz,
    /// so √L sets the comparison scale.
    pub fn zero_mean_within_gate(&self) -> bool {
        let scale = self.grid.period().sqrt() * self.l2_norm();
        self.zero_mode().norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
    }
}

/// coeffs(ξ_k) = h Σ_m f(hm) e^{-i h m ξ_k}
pub fn dft_forward(f: &LatticeField) -> Spectrum {
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    f.grid.plans.forward.process(&mut buf);
    let h = f.grid.spacing();
    for c in &mut buf {
        *c *= h;
    }
    Spectrum { grid: f.grid.clone(), coeffs: buf }
}

/// Inverse transform; returns the real part (see `dft_inverse_residue`).
pub fn dft_inverse(s: &Spectrum) -> LatticeField {
    dft_inverse_residue(s).0
}

/// Inverse transform together with the imaginary residue, which is at
/// roundoff level whenever the spectrum is Hermitian.
pub fn dft_inverse_residue(s: &Spectrum) -> (LatticeField, f64) {
    let mut buf = s.coeffs.clone();
    s.grid.plans.inverse.process(&mut buf);
    let scale = 1.0 / s.grid.period();
    let mut residue: f64 = 0.0;
    let values = buf
        .iter()
        .map(|c| {
            residue = residue.max((c.im * scale).abs());
            c.re * scale
        })
        .collect();
    (LatticeField { grid: s.grid.clone(), values }, residue)
}

/// Complex inverse transform (used where phases destroy Hermitian symmetry).
pub fn dft_inverse_complex(s: &Spectrum) -> Vec<Complex64> {
    let mut buf = s.coeffs.clone();
    s.grid.plans.inverse.process(&mut buf);
    let scale = 1.0 / s.grid.period();
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// h Σ_x f(x) g(x) — the L²(hZ) pairing for real fields.
pub fn inner_product(f: &LatticeField, g: &LatticeField) -> Result<f64> {
    f.grid.check_same(&g.grid, "inner product")?;
    Ok(f.grid.spacing() * f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>())
}

/// Discretization of (1/2π)∫ F ḠG dξ over the Brillouin zone.
pub fn spectral_pairing(a: &Spectrum, b: &Spectrum) -> Result<Complex64> {
    a.grid.check_same(&b.grid, "spectral pairing")?;
    let sum: Complex64 = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| x * y.conj())
        .sum();
    Ok(sum / a.grid.period())
}
