//! The lattice-to-line bridge: piecewise-linear interpolation l_h, its
//! Fourier symbol, the commutator and product defects, and the mixed
//! space-time norm used by the flow-comparison experiments.
//!
//! Line fields are represented on a refinement of the lattice (factor ρ), so
//! the same transform machinery applies; piecewise-linear interpolants are
//! exact at the fine nodes. L² norms of fine fields use the node sum, which
//! is the exact norm for band-limited fields and a second-order quadrature
//! for interpolants, far below the h-power errors being measured.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dft_forward, dft_inverse, LatticeField, LatticeGrid, Spectrum};
use crate::phase::rotation;

/// Samples on the refined grid of the same periodic box.
#[derive(Clone, Debug)]
pub struct LineField {
    pub field: LatticeField,
    pub rho: usize,
}

impl LineField {
    pub fn grid(&self) -> &LatticeGrid {
        &self.field.grid
    }

    pub fn l2_norm(&self) -> f64 {
        self.field.l2_norm()
    }

    pub fn sub(&self, other: &LineField) -> Result<LineField> {
        Ok(LineField { field: self.field.sub(&other.field)?, rho: self.rho })
    }

    pub fn add(&self, other: &LineField) -> Result<LineField> {
        Ok(LineField { field: self.field.add(&other.field)?, rho: self.rho })
    }

    /// Wraps a spectral field living on a fine grid (e.g. a KdV solution).
    pub fn from_field(field: LatticeField, rho: usize) -> Self {
        Self { field, rho }
    }

    /// Spectral derivative ∂_x on the fine grid.
    pub fn spectral_derivative(&self) -> LineField {
        let spec = dft_forward(&self.field);
        let coeffs = spec
            .grid
            .frequencies()
            .iter()
            .zip(&spec.coeffs)
            .map(|(&xi, c)| c * Complex64::new(0.0, xi))
            .collect();
        LineField {
            field: dft_inverse(&Spectrum { grid: spec.grid.clone(), coeffs }),
            rho: self.rho,
        }
    }

    /// Translation by a (modulo the period) through the fine-grid phases.
    pub fn translate(&self, a: f64) -> LineField {
        let spec = dft_forward(&self.field);
        let coeffs = spec
            .grid
            .frequencies()
            .iter()
            .zip(&spec.coeffs)
            .map(|(&xi, c)| c * rotation(-a, xi))
            .collect();
        LineField {
            field: dft_inverse(&Spectrum { grid: spec.grid.clone(), coeffs }),
            rho: self.rho,
        }
    }
}

/// (l_h f)(x) = f(x_m) + (∂_h⁺f)(x_m)·(x - x_m) sampled on the ρ-fold
/// refinement; coarse nodes reproduce the lattice values bit-exactly.
pub fn interpolate(f: &LatticeField, rho: usize) -> Result<LineField> {
    if rho < 2 {
        return Err(Error::InvalidConfig(format!("refinement factor {rho} must be at least 2")));
    }
    let n = f.grid.len();
    let h = f.grid.spacing();
    let fine_grid = LatticeGrid::new(h / rho as f64, n * rho)?;
    let mut values = Vec::with_capacity(n * rho);
    for m in 0..n {
        let a = f.values[m];
        let b = f.values[(m + 1) % n];
        let slope = b - a;
        for r in 0..rho {
            values.push(a + slope * (r as f64 / rho as f64));
        }
    }
    Ok(LineField { field: LatticeField::new(fine_grid, values)?, rho })
}

/// The cellwise-constant derivative of l_h f sampled at the fine nodes.
pub fn interpolant_derivative(f: &LatticeField, rho: usize) -> Result<LineField> {
    if rho < 2 {
        return Err(Error::InvalidConfig(format!("refinement factor {rho} must be at least 2")));
    }
    let n = f.grid.len();
    let h = f.grid.spacing();
    let fine_grid = LatticeGrid::new(h / rho as f64, n * rho)?;
    let mut values = Vec::with_capacity(n * rho);
    for m in 0..n {
        let d = (f.values[(m + 1) % n] - f.values[m]) / h;
        values.extend(std::iter::repeat(d).take(rho));
    }
    Ok(LineField { field: LatticeField::new(fine_grid, values)?, rho })
}

/// 𝓛_h(ξ) = 4 sin²(hξ/2)/(h²ξ²), the Fourier symbol of l_h against the
/// periodized lattice transform; 𝓛_h(0) = 1 and 0 ≤ 𝓛_h ≤ 1.
pub fn interpolation_symbol(h: f64, xi: f64) -> f64 {
    let u = 0.5 * h * xi;
    if u.abs() < 1e-6 {
        let v = u * u;
        1.0 - v / 3.0 + 2.0 * v * v / 45.0
    } else {
        let s = u.sin() / u;
        s * s
    }
}

/// Exact Fourier-series coefficient ∫_box (l_h f)(x) e^{-ixξ} dx at ξ = 2πk/L
/// by per-cell closed-form integration (oracle for `interpolation_symbol`).
pub fn interpolant_fourier_exact(f: &LatticeField, k: i64) -> Complex64 {
    let n = f.grid.len();
    let h = f.grid.spacing();
    let l = f.grid.period();
    let xi = 2.0 * std::f64::consts::PI * k as f64 / l;
    // ∫_0^h e^{-i(x_m+s)ξ}(a + (b-a)s/h) ds = e^{-ix_mξ}·h·(a·φ₁ + (b-a)·ψ)
    // with φ₁(z) = (e^z-1)/z and ψ(z) = ∫₀¹σe^{zσ}dσ = (ze^z-e^z+1)/z²
    // at z = -ihξ.
    let z = Complex64::new(0.0, -h * xi);
    let (phi1, psi_m) = cell_moments(z);
    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let a = f.values[m];
        let b = f.values[(m + 1) % n];
        let x_m = h * m as f64;
        let cell = h * (a * phi1 + (b - a) * psi_m);
        total += Complex64::new(0.0, -x_m * xi).exp() * cell;
    }
    total
}

fn cell_moments(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-4 {
        let one = Complex64::new(1.0, 0.0);
        let phi1 = one + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
        // ψ = Σ_k z^k (k+1)/(k+2)!
        let psi = one / 2.0 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0 + z * z * z * z / 144.0;
        (phi1, psi)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (z * ez - ez + 1.0) / (z * z))
    }
}

/// ‖l_h ∇_h f - ∂_x l_h f‖_{L²(box)} by exact per-cell integration.
///
/// On each cell the difference is c_m + d_m·(x-x_m) with
/// c_m = (∇_h f - ∂_h⁺ f)(x_m) and d_m = (∂_h⁺ ∇_h f)(x_m).
pub fn commutator_defect(f: &LatticeField) -> Result<f64> {
    use crate::multiplier::{apply_multiplier, SymbolTable};
    let grid = &f.grid;
    let h = grid.spacing();
    let n = grid.len();
    let table = SymbolTable::new(h);
    let nabla_f = dft_inverse(&apply_multiplier(&dft_forward(f), &table.nabla())?);
    let mut sum = 0.0;
    for m in 0..n {
        let fwd = |g: &LatticeField| (g.values[(m + 1) % n] - g.values[m]) / h;
        let c = nabla_f.values[m] - fwd(f);
        let d = fwd(&nabla_f);
        // ∫_0^h (c + d s)² ds
        sum += c * c * h + c * d * h * h + d * d * h * h * h / 3.0;
    }
    Ok(sum.sqrt())
}

/// ‖∂_x l_h(f²) - ∂_x (l_h f)²‖_{L²(box)}; the integrand on each cell is
/// (∂_h⁺f)²·(h - 2(x-x_m)), so the defect equals (h/√3)‖(∂_h⁺f)²‖ exactly.
pub fn product_defect(f: &LatticeField) -> Result<f64> {
    let grid = &f.grid;
    let h = grid.spacing();
    let n = grid.len();
    let mut sum = 0.0;
    for m in 0..n {
        let dp = (f.values[(m + 1) % n] - f.values[m]) / h;
        let e = dp * dp;
        // ∫_0^h e²(h-2s)² ds = e² h³/3
        sum += e * e * h * h * h / 3.0;
    }
    Ok(sum.sqrt())
}

/// Pointwise check of the displayed cell identity behind `product_defect`:
/// returns the max over cells and sample points of the difference between
/// ∂_x l_h(f²) - ∂_x(l_h f)² and (∂_h⁺f)²(h - 2(x-x_m)).
pub fn product_defect_identity_residual(f: &LatticeField) -> f64 {
    let h = f.grid.spacing();
    let n = f.grid.len();
    let mut worst: f64 = 0.0;
    for m in 0..n {
        let a = f.values[m];
        let b = f.values[(m + 1) % n];
        let dp = (b - a) / h;
        let dsq = (b * b - a * a) / h;
        for r in 0..8 {
            let s = h * (r as f64 + 0.5) / 8.0;
            let lhs = dsq - 2.0 * (a + dp * s) * dp;
            let rhs = dp * dp * (h - 2.0 * s);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// ‖u‖_S = max_t ‖u(t)‖_{L²} + max_x ‖u_x(·,x)‖_{L²_t} over [-T, T].
///
/// `samples` pairs each time with the field and its spatial derivative; the
/// caller chooses the derivative representation (cellwise-constant for
/// interpolants, spectral for band-limited fields). Needs at least 64
/// samples with strictly increasing times; the t-integral is a trapezoid.
pub fn mixed_norm_s(times: &[f64], u: &[LineField], ux: &[LineField]) -> Result<f64> {
    if times.len() < 64 {
        return Err(Error::UnderResolved(format!(
            "mixed norm needs at least 64 time samples, got {}",
            times.len()
        )));
    }
    if times.len() != u.len() || times.len() != ux.len() {
        return Err(Error::InvalidConfig("times and samples must align".into()));
    }
    if !times.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig("sample times must be strictly increasing".into()));
    }
    let nx = u[0].field.values.len();
    let mut sup_l2: f64 = 0.0;
    let mut tsq = vec![0.0f64; nx];
    for i in 0..times.len() {
        u[i].field.grid.check_same(&u[0].field.grid, "mixed norm samples")?;
        ux[i].field.grid.check_same(&u[0].field.grid, "mixed norm samples")?;
        sup_l2 = sup_l2.max(u[i].l2_norm());
        let w = trapezoid_weight(times, i);
        for (acc, v) in tsq.iter_mut().zip(&ux[i].field.values) {
            *acc += w * v * v;
        }
    }
    let sup_x = tsq.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt();
    Ok(sup_l2 + sup_x)
}

fn trapezoid_weight(times: &[f64], i: usize) -> f64 {
    let left = if i == 0 { 0.0 } else { times[i] - times[i - 1] };
    let right = if i + 1 == times.len() { 0.0 } else { times[i + 1] - times[i] };
    0.5 * (left + right)
}

/// sup over samples of ‖(l_h r̃)(t, ·) - w⁺(t, · - t/h²) - w⁻(t, · + t/h²)‖,
/// translations taken modulo the period.
///
/// All three trajectories must live on the same fine grid and share sample
/// times; h is the lattice spacing behind the interpolated trajectory.
pub fn continuum_error(
    times: &[f64],
    lhr: &[LineField],
    w_plus: &[LineField],
    w_minus: &[LineField],
    h: f64,
) -> Result<f64> {
    if times.len() != lhr.len() || times.len() != w_plus.len() || times.len() != w_minus.len() {
        return Err(Error::InvalidConfig("trajectory lengths must align".into()));
    }
    let mut sup = 0.0f64;
    for i in 0..times.len() {
        lhr[i].field.grid.check_same(&w_plus[i].field.grid, "continuum error")?;
        lhr[i].field.grid.check_same(&w_minus[i].field.grid, "continuum error")?;
        let shift = times[i] / (h * h);
        let wp = w_plus[i].translate(shift);
        let wm = w_minus[i].translate(-shift);
        let diff = lhr[i].sub(&wp)?.sub(&wm)?;
        sup = sup.max(diff.l2_norm());
    }
    Ok(sup)
}

/// Fraction of L² mass within `margin`·L of the box seam (x = 0 ≡ L); the
/// wrap-interference diagnostic for localized data.
pub fn seam_mass_fraction(f: &LatticeField, margin: f64) -> f64 {
    let n = f.grid.len();
    let band = ((n as f64) * margin).ceil() as usize;
    let mut seam = 0.0;
    let mut total = 0.0;
    for (m, v) in f.values.iter().enumerate() {
        let d = m.min(n - m);
        total += v * v;
        if d <= band {
            seam += v * v;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        seam / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::sobolev_norm;
    use approx::assert_relative_eq;
    use rand::prelude::*;

    fn random_field(grid: &LatticeGrid, seed: u64) -> LatticeField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        LatticeField::new(
            grid.clone(),
            (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    /// Random field with an H²-type spectral profile (zero edge mode).
    fn smooth_random(grid: &LatticeGrid, decay: f64, seed: u64) -> LatticeField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = grid.len();
        let mut spec = Spectrum::zeros(grid.clone());
        for j in 1..n / 2 {
            let xi = grid.xi(j);
            let amp = (1.0 + xi * xi).powf(-decay / 2.0);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let c = Complex64::new(th.cos(), th.sin()) * amp;
            spec.coeffs[j] = c;
            spec.coeffs[n - j] = c.conj();
        }
        dft_inverse(&spec)
    }

    #[test]
    fn constant_interpolates_to_constant() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let f = LatticeField::constant(grid, 3.5);
        let lf = interpolate(&f, 8).unwrap();
        assert!(lf.field.values.iter().all(|&v| v == 3.5));
    }

    #[test]
    fn coarse_nodes_bit_exact() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let f = random_field(&grid, 1);
        let rho = 8;
        let lf = interpolate(&f, rho).unwrap();
        for m in 0..grid.len() {
            assert_eq!(lf.field.values[m * rho], f.values[m]);
        }
    }

    #[test]
    fn interpolation_bounded_in_sobolev() {
        // ‖l_h f‖_{Ḣ^s} ≤ C ‖f‖_{Ḣ^s} with C ≤ 2 for s ∈ [0, 1]
        let grid = LatticeGrid::new(0.125, 256).unwrap();
        for seed in 0..5 {
            let f = smooth_random(&grid, 1.5, seed);
            let lf = interpolate(&f, 8).unwrap();
            for &s in &[0.0, 0.5, 1.0] {
                let num = sobolev_norm(&lf.field, s, true).unwrap();
                let den = sobolev_norm(&f, s, true).unwrap();
                assert!(num <= 2.0 * den, "s={s}: {num} vs {den}");
                assert!(num >= 0.2 * den);
            }
        }
    }

    #[test]
    fn fourier_symbol_matches_exact_integral() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let h = grid.spacing();
        let l = grid.period();
        let f = smooth_random(&grid, 2.0, 3);
        let spec = dft_forward(&f);
        let n = grid.len() as i64;
        // sample ξ = 2πk/L across several Brillouin copies
        for &k in &[1i64, 7, 20, 31, 40, 65, 97, 130, -9, -33, -80] {
            let exact = interpolant_fourier_exact(&f, k);
            // periodized lattice transform: wrap k into [-n/2, n/2)
            let kw = ((k + n / 2).rem_euclid(n)) - n / 2;
            let idx = if kw >= 0 { kw as usize } else { (kw + n) as usize };
            let xi = 2.0 * std::f64::consts::PI * k as f64 / l;
            let predicted = spec.coeffs[idx] * interpolation_symbol(h, xi);
            assert!(
                (exact - predicted).norm() < 1e-10 * (1.0 + exact.norm()),
                "k={k}: exact {exact}, predicted {predicted}"
            );
        }
    }

    #[test]
    fn symbol_range() {
        let h = 0.25;
        assert_relative_eq!(interpolation_symbol(h, 0.0), 1.0);
        for j in 1..200 {
            let xi = j as f64 * 0.5;
            let v = interpolation_symbol(h, xi);
            assert!(v >= 0.0 && v <= 1.0);
        }
        // series/direct agreement at the crossover
        for &xi in &[1e-7, 7e-6, 1e-5] {
            let u = 0.5 * h * xi;
            let direct = (u.sin() / u).powi(2);
            assert_relative_eq!(interpolation_symbol(h, xi), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn commutator_defect_constant_zero() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let f = LatticeField::constant(grid, 2.0);
        assert!(commutator_defect(&f).unwrap() < 1e-13);
    }

    #[test]
    fn commutator_defect_single_mode_closed_form() {
        // for e^{iξ₀x} all cells contribute equally: defect² over cos/sin
        // parts sums to n·(|c|²h + Re(c̄d)h² + |d|²h³/3)
        let grid = LatticeGrid::new(0.25, 128).unwrap();
        let h = grid.spacing();
        let l = grid.period();
        let k = 9.0;
        let xi0 = 2.0 * std::f64::consts::PI * k / l;
        let fc = LatticeField::from_fn(grid.clone(), |x| (xi0 * x).cos());
        let fs = LatticeField::from_fn(grid.clone(), |x| (xi0 * x).sin());
        let dc = commutator_defect(&fc).unwrap();
        let ds = commutator_defect(&fs).unwrap();
        let sigma = crate::multiplier::nabla_sigma(h, xi0);
        let p = (Complex64::new(0.0, h * xi0).exp() - 1.0) / h;
        let c = Complex64::new(0.0, sigma) - p;
        let d = Complex64::new(0.0, sigma) * p;
        let per_cell = c.norm_sqr() * h + (c.conj() * d).re * h * h + d.norm_sqr() * h * h * h / 3.0;
        let expect = (grid.len() as f64 * per_cell).sqrt();
        let measured = (dc * dc + ds * ds).sqrt();
        assert_relative_eq!(measured, expect, max_relative = 1e-10);
    }

    #[test]
    fn commutator_defect_uniform_bound() {
        // defect ≤ C h ‖f‖_{Ḣ²} across spacings
        let mut worst: f64 = 0.0;
        for k in 2..=7 {
            let h = 0.5f64.powi(k);
            let grid = LatticeGrid::with_period(h, 32.0).unwrap();
            for seed in 0..3 {
                let f = smooth_random(&grid, 2.6, seed);
                let defect = commutator_defect(&f).unwrap();
                let h2 = sobolev_norm(&f, 2.0, true).unwrap();
                worst = worst.max(defect / (h * h2));
            }
        }
        assert!(worst < 3.0, "commutator constant {worst}");
    }

    #[test]
    fn product_defect_exact_ratio() {
        // defect = (h/√3)·‖(∂_h⁺f)²‖_{L²} for every field
        let grid = LatticeGrid::new(0.25, 128).unwrap();
        let h = grid.spacing();
        for seed in 0..5 {
            let f = random_field(&grid, seed);
            let defect = product_defect(&f).unwrap();
            let mut sq = 0.0;
            for m in 0..grid.len() {
                let dp = (f.values[(m + 1) % grid.len()] - f.values[m]) / h;
                sq += dp.powi(4);
            }
            let norm = (h * sq).sqrt();
            assert_relative_eq!(defect, h / 3.0f64.sqrt() * norm, max_relative = 1e-12);
        }
        // constant field → 0
        assert_eq!(product_defect(&LatticeField::constant(grid, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn product_defect_cell_identity() {
        let grid = LatticeGrid::new(0.5, 64).unwrap();
        let f = random_field(&grid, 11);
        assert!(product_defect_identity_residual(&f) < 1e-12);
    }

    #[test]
    fn mixed_norm_separable_field() {
        // u(t,x) = g(x): norm = ‖g‖_{L²} + √(2T)·sup|g'|
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let g = smooth_random(&grid, 2.0, 5);
        let lg = interpolate(&g, 8).unwrap();
        let dg = interpolant_derivative(&g, 8).unwrap();
        let t_max = 0.75;
        let nt = 97;
        let times: Vec<f64> = (0..nt)
            .map(|i| -t_max + 2.0 * t_max * i as f64 / (nt - 1) as f64)
            .collect();
        let u: Vec<LineField> = times.iter().map(|_| lg.clone()).collect();
        let ux: Vec<LineField> = times.iter().map(|_| dg.clone()).collect();
        let norm = mixed_norm_s(&times, &u, &ux).unwrap();
        let expect = lg.l2_norm()
            + (2.0 * t_max).sqrt() * dg.field.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_relative_eq!(norm, expect, max_relative = 1e-12);
        // zero trajectory
        let z = LineField { field: LatticeField::zeros(lg.field.grid.clone()), rho: 8 };
        let zs: Vec<LineField> = times.iter().map(|_| z.clone()).collect();
        assert_eq!(mixed_norm_s(&times, &zs, &zs).unwrap(), 0.0);
    }

    #[test]
    fn mixed_norm_rejects_undersampled() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let z = LineField { field: LatticeField::zeros(grid), rho: 2 };
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let u: Vec<LineField> = times.iter().map(|_| z.clone()).collect();
        assert!(matches!(
            mixed_norm_s(&times, &u, &u),
            Err(Error::UnderResolved(_))
        ));
    }

    #[test]
    fn continuum_error_trivial_cases() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let h = grid.spacing();
        let zero_line = interpolate(&LatticeField::zeros(grid.clone()), 4).unwrap();
        let times = vec![0.0, 0.1, 0.2];
        let traj: Vec<LineField> = times.iter().map(|_| zero_line.clone()).collect();
        assert_eq!(continuum_error(&times, &traj, &traj, &traj, h).unwrap(), 0.0);

        // at t = 0 with w± = l_h u±: error vanishes by linearity of l_h
        let r0 = smooth_random(&grid, 1.6, 7);
        let up = r0.scale(0.5);
        let um = r0.scale(0.5);
        let lhr = interpolate(&r0, 4).unwrap();
        let wp = interpolate(&up, 4).unwrap();
        let wm = interpolate(&um, 4).unwrap();
        let e = continuum_error(&[0.0], &[lhr], &[wp], &[wm], h).unwrap();
        assert!(e < 1e-12);
    }

    #[test]
    fn seam_diagnostic() {
        let grid = LatticeGrid::new(0.25, 256).unwrap();
        let l = grid.period();
        let centered = LatticeField::from_fn(grid.clone(), |x| {
            (-((x - l / 2.0) / 2.0).powi(2)).exp()
        });
        assert!(seam_mass_fraction(&centered, 1.0 / 16.0) < 1e-6);
        let at_seam = LatticeField::from_fn(grid, |x| (-(x.min(l - x) / 2.0).powi(2)).exp());
        assert!(seam_mass_fraction(&at_seam, 1.0 / 16.0) > 0.5);
    }
}
