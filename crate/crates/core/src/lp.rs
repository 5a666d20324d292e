//! Littlewood–Paley projections on the lattice.
//!
//! The bump φ is 1 on |ξ| ≤ 1, exp(1 - 1/(1-(|ξ|-1)²)) on 1 < |ξ| < 2 and 0
//! beyond. Band pieces are ψ_N(ξ) = φ(hξ/πN) - φ(2hξ/πN) for dyadic N ≤ 1,
//! supported in πN/2h ≤ |ξ| ≤ 2πN/h. The low piece P_{≤N} carries the symbol
//! φ(hξ/πN) so that P_{≤N₀} + Σ_{N₀<N≤1} P_N telescopes to the identity
//! exactly, including the zero mode.

use crate::error::{Error, Result};
use crate::grid::{dft_forward, dft_inverse, LatticeField, LatticeGrid, Spectrum};

/// Smooth even bump: 1 on |x| ≤ 1, 0 on |x| ≥ 2.
pub fn bump(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let t = a - 1.0;
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// ψ_N(ξ) for dyadic N.
pub fn psi(h: f64, n_dyadic: f64, xi: f64) -> f64 {
    let u = h * xi / (std::f64::consts::PI * n_dyadic);
    bump(u) - bump(2.0 * u)
}

fn check_dyadic(n_dyadic: f64) -> Result<()> {
    if !(n_dyadic > 0.0) || n_dyadic > 1.0 {
        return Err(Error::InvalidConfig(format!("dyadic level N = {n_dyadic} must lie in (0, 1]")));
    }
    let l = n_dyadic.log2();
    if (l - l.round()).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!("N = {n_dyadic} is not dyadic")));
    }
    Ok(())
}

/// Band projection P_N.
pub fn lp_project(f: &LatticeField, n_dyadic: f64) -> Result<LatticeField> {
    Ok(dft_inverse(&lp_project_spec(&dft_forward(f), n_dyadic)?))
}

pub fn lp_project_spec(s: &Spectrum, n_dyadic: f64) -> Result<Spectrum> {
    check_dyadic(n_dyadic)?;
    let h = s.grid.spacing();
    let coeffs = s
        .grid
        .frequencies()
        .iter()
        .zip(&s.coeffs)
        .map(|(&xi, c)| c * psi(h, n_dyadic, xi))
        .collect();
    Ok(Spectrum { grid: s.grid.clone(), coeffs })
}

/// Low piece P_{≤N} with symbol φ(hξ/πN); includes the zero mode.
pub fn lp_low(f: &LatticeField, n_dyadic: f64) -> Result<LatticeField> {
    check_dyadic(n_dyadic)?;
    let s = dft_forward(f);
    let h = s.grid.spacing();
    let coeffs = s
        .grid
        .frequencies()
        .iter()
        .zip(&s.coeffs)
        .map(|(&xi, c)| c * bump(h * xi / (std::f64::consts::PI * n_dyadic)))
        .collect();
    Ok(dft_inverse(&Spectrum { grid: s.grid.clone(), coeffs }))
}

/// Dyadic levels N = 2^{-j} down to the level whose band reaches the first
/// nonzero frequency of the grid; the last entry is the low-piece cutoff N₀.
pub fn dyadic_levels(grid: &LatticeGrid) -> Vec<f64> {
    // Stop once 2πN/h drops below ξ_min = 2π/L, i.e. N < h/L = 1/n.
    let mut levels = Vec::new();
    let n_min = 1.0 / grid.len() as f64;
    let mut n_dyadic = 1.0;
    while n_dyadic >= n_min {
        levels.push(n_dyadic);
        n_dyadic *= 0.5;
    }
    levels
}
