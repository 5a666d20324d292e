//! Sobolev norms on the lattice, evaluated on the Plancherel side.

use crate::error::{Error, Result};
use crate::grid::{dft_forward, LatticeField, Spectrum};
use crate::multiplier::nabla_sigma;

/// ‖⟨∂_h⟩^s f‖_{L²} (inhomogeneous) or ‖|∂_h|^s f‖_{L²} (homogeneous).
///
/// A homogeneous norm of negative order requires the zero mode to vanish;
/// inputs outside the 1e-12 gate are rejected.
pub fn sobolev_norm(f: &LatticeField, s: f64, homogeneous: bool) -> Result<f64> {
    sobolev_norm_spec(&dft_forward(f), s, homogeneous)
}

pub fn sobolev_norm_spec(spec: &Spectrum, s: f64, homogeneous: bool) -> Result<f64> {
    if homogeneous && s < 0.0 && !spec.zero_mean_within_gate() {
        return Err(Error::NonzeroMean(
            "homogeneous negative-order norm of a field with nonzero mean".into(),
        ));
    }
    let mut sum = 0.0;
    for (&xi, c) in spec.grid.frequencies().iter().zip(&spec.coeffs) {
        let w = if homogeneous {
            if xi == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                xi.abs().powf(2.0 * s)
            }
        } else {
            (1.0 + xi * xi).powf(s)
        };
        sum += w * c.norm_sqr();
    }
    Ok((sum / spec.grid.period()).sqrt())
}

/// Homogeneous norm with the lattice weight |(2/h) sin(hξ/2)|^s in place of
/// |ξ|^s. Comparable to `sobolev_norm(.., homogeneous)` within [(2/π)^s, 1].
pub fn sobolev_norm_nabla(f: &LatticeField, s: f64) -> Result<f64> {
    let spec = dft_forward(f);
    if s < 0.0 && !spec.zero_mean_within_gate() {
        return Err(Error::NonzeroMean(
            "homogeneous negative-order norm of a field with nonzero mean".into(),
        ));
    }
    let h = spec.grid.spacing();
    let mut sum = 0.0;
    for (&xi, c) in spec.grid.frequencies().iter().zip(&spec.coeffs) {
        let sig = nabla_sigma(h, xi).abs();
        let w = if sig == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            sig.powf(2.0 * s)
        };
        sum += w * c.norm_sqr();
    }
    Ok((sum / spec.grid.period()).sqrt())
}

/// ℓ²-combined norm of a pair, the product-space H^s × H^s norm.
pub fn pair_norm(a: &LatticeField, b: &LatticeField, s: f64) -> Result<f64> {
    let na = sobolev_norm(a, s, false)?;
    let nb = sobolev_norm(b, s, false)?;
    Ok(na.hypot(nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LatticeGrid;
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

    fn zero_mean(f: &LatticeField) -> LatticeField {
        let m = f.mean();
        LatticeField::new(f.grid.clone(), f.values.iter().map(|v| v - m).collect()).unwrap()
    }

    #[test]
    fn order_zero_is_l2() {
        let grid = LatticeGrid::new(0.25, 128).unwrap();
        let f = random_field(&grid, 1);
        assert_relative_eq!(sobolev_norm(&f, 0.0, false).unwrap(), f.l2_norm(), max_relative = 1e-12);
        assert_relative_eq!(sobolev_norm(&f, 0.0, true).unwrap(), f.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn lattice_weight_equivalence_band() {
        // ratio of the two homogeneous norms lies in [(2/π)^s, 1] for s ∈ [0,1]
        let grid = LatticeGrid::new(0.125, 256).unwrap();
        for seed in 0..10 {
            let f = zero_mean(&random_field(&grid, seed));
            for &s in &[0.25, 0.5, 0.75, 1.0] {
                let a = sobolev_norm_nabla(&f, s).unwrap();
                let b = sobolev_norm(&f, s, true).unwrap();
                let ratio = a / b;
                let lo = (2.0 / std::f64::consts::PI).powf(s);
                assert!(ratio >= lo - 1e-12 && ratio <= 1.0 + 1e-12, "ratio {ratio} at s={s}");
            }
        }
    }

    #[test]
    fn differential_operator_bound() {
        // ‖f‖_{Ḣ^{s2}} ≤ (π/h)^{s2-s1} ‖f‖_{Ḣ^{s1}}
        let grid = LatticeGrid::new(0.25, 128).unwrap();
        let edge = std::f64::consts::PI / grid.spacing();
        for seed in 0..10 {
            let f = zero_mean(&random_field(&grid, seed));
            for &(s1, s2) in &[(0.0, 0.5), (0.0, 2.0), (0.5, 1.0), (1.0, 2.0)] {
                let a = sobolev_norm(&f, s2, true).unwrap();
                let b = sobolev_norm(&f, s1, true).unwrap();
                assert!(a <= edge.powf(s2 - s1) * b * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn negative_order_needs_zero_mean() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let f = LatticeField::constant(grid, 1.0);
        assert!(sobolev_norm(&f, -0.5, true).is_err());
    }
}
