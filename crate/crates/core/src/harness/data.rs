//! Synthetic initial data for the experiments.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{dft_inverse, LatticeField, LatticeGrid, Spectrum};
use crate::multiplier::nabla_sigma;
use crate::norms::sobolev_norm;

const PROFILE_EPS: f64 = 0.01;

/// The pair (r₀, r₁) plus the companion field q = h²∇_h⁻¹r₁ used by the
/// split data and the norm bookkeeping.
#[derive(Clone, Debug)]
pub struct HsData {
    pub r0: LatticeField,
    pub r1: LatticeField,
    pub q: LatticeField,
}

/// Deterministic H^s-class data: spectral amplitude A⟨ξ⟩^{-s-1/2-ε} with
/// unit-modulus random phases (Hermitian, empty edge mode), normalized so
/// that ‖(r₀, h²∇_h⁻¹r₁)‖_{H^s×H^s} = R exactly; r₁ is the gradient of a
/// same-class zero-mean field, so its mean vanishes by construction.
pub fn generate_hs_data(grid: &LatticeGrid, s: f64, r_bound: f64, seed: u64) -> Result<HsData> {
    let target = r_bound / 2.0f64.sqrt();
    // r₀ is kept zero-mean: the torus zero mode has no counterpart in the
    // infinite-lattice data class, and it sits exactly on the resonance of
    // the counter-propagating coupling (the translation flow fixes it)
    let r0 = profile_field(grid, s, target, seed, false)?;
    let q = profile_field(grid, s, target, seed.wrapping_add(0x9e3779b97f4a7c15), false)?;
    // r₁ = (1/h²)∇_h q
    let h = grid.spacing();
    let spec_q = crate::grid::dft_forward(&q);
    let coeffs = grid
        .frequencies()
        .iter()
        .zip(&spec_q.coeffs)
        .map(|(&xi, c)| c * Complex64::new(0.0, nabla_sigma(h, xi) / (h * h)))
        .collect();
    let r1 = dft_inverse(&Spectrum { grid: grid.clone(), coeffs });
    Ok(HsData { r0, r1, q })
}

/// One field of the class, with ‖·‖_{H^s} = target exactly.
pub fn profile_field(
    grid: &LatticeGrid,
    s: f64,
    target: f64,
    seed: u64,
    keep_mean: bool,
) -> Result<LatticeField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let mut spec = Spectrum::zeros(grid.clone());
    let decay = -(s + 0.5 + PROFILE_EPS);
    for j in 1..n / 2 {
        let xi = grid.xi(j);
        let amp = (1.0 + xi * xi).powf(0.5 * decay);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex64::new(th.cos(), th.sin()) * amp;
        spec.coeffs[j] = c;
        spec.coeffs[n - j] = c.conj();
    }
    if keep_mean {
        let sign: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        spec.coeffs[0] = Complex64::new(sign, 0.0);
    }
    // edge mode stays empty: it has no conjugate partner
    let f = dft_inverse(&spec);
    let norm = sobolev_norm(&f, s, false)?;
    Ok(f.scale(target / norm))
}

/// Band-limited random pair with combined H^s norm R; the velocity part is
/// again a gradient so its mean vanishes.
pub fn smooth_pair_data(
    grid: &LatticeGrid,
    band: usize,
    s: f64,
    r_bound: f64,
    seed: u64,
) -> Result<HsData> {
    let a = smooth_data(grid, band, 1.0, seed.wrapping_add(1));
    let qf = smooth_data(grid, band, 1.0, seed.wrapping_add(2));
    let norm = crate::norms::pair_norm(&a, &qf, s)?;
    let r0 = a.scale(r_bound / norm);
    let q = qf.scale(r_bound / norm);
    let h = grid.spacing();
    let spec_q = crate::grid::dft_forward(&q);
    let coeffs = grid
        .frequencies()
        .iter()
        .zip(&spec_q.coeffs)
        .map(|(&xi, c)| c * Complex64::new(0.0, nabla_sigma(h, xi) / (h * h)))
        .collect();
    let r1 = dft_inverse(&Spectrum { grid: grid.clone(), coeffs });
    Ok(HsData { r0, r1, q })
}

/// Band-limited smooth random data (modes 1..=band), for scheme-order and
/// conservation runs where spectral tails must be negligible.
pub fn smooth_data(grid: &LatticeGrid, band: usize, amplitude: f64, seed: u64) -> LatticeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let mut spec = Spectrum::zeros(grid.clone());
    for j in 1..=band.min(n / 2 - 1) {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex64::new(th.cos(), th.sin()) / (1.0 + (j * j) as f64);
        spec.coeffs[j] = c;
        spec.coeffs[n - j] = c.conj();
    }
    let f = dft_inverse(&spec);
    let peak = f.linf_norm();
    f.scale(amplitude / peak.max(f64::MIN_POSITIVE))
}

/// Soliton-derived single-directional data: r₀ is the KdV soliton profile
/// 6c·sech²(√(6c)(x - L/2)) with its lattice mean removed, and r₁ = -∇_h r₀/h²,
/// which makes u⁻ vanish identically in the split.
pub fn soliton_data(grid: &LatticeGrid, speed: f64) -> Result<HsData> {
    let l = grid.period();
    let h = grid.spacing();
    let kappa = (6.0 * speed).sqrt();
    let raw = LatticeField::from_fn(grid.clone(), |x| {
        6.0 * speed / (kappa * (x - 0.5 * l)).cosh().powi(2)
    });
    let r0 = crate::fpu::project_zero_mean(&raw);
    let spec = crate::grid::dft_forward(&r0);
    let coeffs = grid
        .frequencies()
        .iter()
        .zip(&spec.coeffs)
        .map(|(&xi, c)| c * Complex64::new(0.0, -nabla_sigma(h, xi) / (h * h)))
        .collect();
    let r1 = dft_inverse(&Spectrum { grid: grid.clone(), coeffs });
    let q = r0.scale(-1.0);
    Ok(HsData { r0, r1, q })
}
