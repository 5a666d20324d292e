//! The physical chain: Hamiltonian, higher-order remainder, and a real-space
//! leapfrog integrator for cross-validation.
//!
//! The remainder is computed as the exact defect between the true
//! nonlinearity and its quadratic model, R = (2/h⁶)(V'(h²r̃) - a h²r̃ -
//! b h⁴r̃²/2); for the cubic potential it vanishes identically, and by
//! Taylor's theorem it coincides with (V⁗(h²r̃*)/3)·r̃³ for an intermediate
//! point r̃*.

use crate::error::{Error, Result};
use crate::grid::{dft_forward, LatticeField};
use crate::multiplier::nabla_sigma;
use crate::potential::Potential;

/// Relative displacement and its time derivative at one instant.
#[derive(Clone, Debug)]
pub struct FpuState {
    pub r: LatticeField,
    pub rt: LatticeField,
    pub time: f64,
}

impl FpuState {
    pub fn new(r: LatticeField, rt: LatticeField, time: f64) -> Result<Self> {
        r.grid.check_same(&rt.grid, "FPU state")?;
        Ok(Self { r, rt, time })
    }
}

/// H_h = h Σ { ½((h²/√(-Δ_h)) ∂_t r̃)² + (1/h⁴) V(h² r̃) }.
///
/// The kinetic term needs the zero mode of ∂_t r̃ to vanish.
pub fn hamiltonian(state: &FpuState, potential: &Potential) -> Result<f64> {
    let grid = &state.r.grid;
    let h = grid.spacing();
    let rt_spec = dft_forward(&state.rt);
    if !rt_spec.zero_mean_within_gate() {
        return Err(Error::NonzeroMean(
            "kinetic term applies (√(-Δ_h))⁻¹; ∂_t r̃ must have zero mean".into(),
        ));
    }
    let mut kinetic = 0.0;
    for (&xi, c) in grid.frequencies().iter().zip(&rt_spec.coeffs) {
        let omega = nabla_sigma(h, xi).abs();
        if omega > 0.0 {
            let w = h * h / omega;
            kinetic += w * w * c.norm_sqr();
        }
    }
    kinetic *= 0.5 / grid.period();

    let h4 = h.powi(4);
    let mut pot = 0.0;
    for &r in &state.r.values {
        pot += potential.eval(0, h * h * r)?;
    }
    pot *= h / h4;

    Ok(kinetic + pot)
}

/// The higher-order remainder field R with
/// (1/h⁶)Δ_h{V'(h²r̃) - a h²r̃} = (1/2h²)Δ_h{b r̃² + h² R}.
pub fn remainder(r: &LatticeField, potential: &Potential) -> Result<LatticeField> {
    let h = r.grid.spacing();
    let scale = 2.0 / h.powi(6);
    let h2 = h * h;
    let values = r
        .values
        .iter()
        .map(|&v| potential.nonlinearity_defect(h2 * v).map(|d| scale * d))
        .collect::<Result<Vec<_>>>()?;
    LatticeField::new(r.grid.clone(), values)
}

/// Acceleration of the unscaled chain, ∂_t²r = Δ₁(V'(r)).
fn chain_acceleration(r: &LatticeField, potential: &Potential) -> Result<Vec<f64>> {
    let n = r.values.len();
    let vp: Vec<f64> = r
        .values
        .iter()
        .map(|&v| potential.eval(1, v))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..n)
        .map(|m| vp[(m + 1) % n] + vp[(m + n - 1) % n] - 2.0 * vp[m])
        .collect())
}

/// CFL-style bound for the leapfrog step: 0.5/√(max|V''|) over the state's
/// amplitude range (at least the linear stiffness a).
pub fn leapfrog_stability_bound(state: &FpuState, potential: &Potential) -> Result<f64> {
    let mut vpp_max = potential.stiffness();
    for &r in &state.r.values {
        vpp_max = vpp_max.max(potential.eval(2, r)?.abs());
    }
    Ok(0.5 / vpp_max.sqrt())
}

/// One velocity-Verlet step of ∂_t²r = Δ₁(V'(r)) on the unit-spacing chain.
pub fn step_direct(state: &FpuState, potential: &Potential, dt: f64) -> Result<FpuState> {
    if state.r.grid.spacing() != 1.0 {
        return Err(Error::GridMismatch(
            "the direct integrator works on the unscaled chain (spacing 1)".into(),
        ));
    }
    let bound = leapfrog_stability_bound(state, potential)?;
    if dt.abs() > bound {
        return Err(Error::UnstableStep { dt, bound });
    }
    let acc = chain_acceleration(&state.r, potential)?;
    let half: Vec<f64> = state
        .rt
        .values
        .iter()
        .zip(&acc)
        .map(|(v, a)| v + 0.5 * dt * a)
        .collect();
    let r_new: Vec<f64> = state
        .r
        .values
        .iter()
        .zip(&half)
        .map(|(r, v)| r + dt * v)
        .collect();
    let r_new = LatticeField::new(state.r.grid.clone(), r_new)?;
    let acc_new = chain_acceleration(&r_new, potential)?;
    let rt_new: Vec<f64> = half
        .iter()
        .zip(&acc_new)
        .map(|(v, a)| v + 0.5 * dt * a)
        .collect();
    Ok(FpuState {
        rt: LatticeField::new(state.r.grid.clone(), rt_new)?,
        r: r_new,
        time: state.time + dt,
    })
}

/// Samples of the unscaled-chain trajectory r(t, x) = h² r̃(h³ t, h x) at
/// chain time t, from a rescaled state at lattice time h³·t.
pub fn rescale_to_chain(r_tilde: &LatticeField, rt_tilde: &LatticeField, unit_grid: &crate::grid::LatticeGrid) -> Result<(LatticeField, LatticeField)> {
    let h = r_tilde.grid.spacing();
    if r_tilde.grid.len() != unit_grid.len() {
        return Err(Error::GridMismatch("chain and lattice must have the same site count".into()));
    }
    let h2 = h * h;
    let h5 = h2 * h2 * h;
    let r = LatticeField::new(unit_grid.clone(), r_tilde.values.iter().map(|v| h2 * v).collect())?;
    let rt = LatticeField::new(unit_grid.clone(), rt_tilde.values.iter().map(|v| h5 * v).collect())?;
    Ok((r, rt))
}

/// Projects the zero mode out of a field (used to prepare valid ∂_t r̃ data).
pub fn project_zero_mean(f: &LatticeField) -> LatticeField {
    let m = f.mean();
    LatticeField {
        grid: f.grid.clone(),
        values: f.values.iter().map(|v| v - m).collect(),
    }
}

/// Energy drift diagnostic: max |H(t)-H(0)|/|H(0)| over a leapfrog run.
pub fn leapfrog_energy_drift(
    init: &FpuState,
    potential: &Potential,
    dt: f64,
    steps: usize,
) -> Result<f64> {
    let h0 = hamiltonian(init, potential)?;
    let mut state = init.clone();
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        state = step_direct(&state, potential, dt)?;
        let h = hamiltonian(&state, potential)?;
        drift = drift.max((h - h0).abs() / h0.abs().max(f64::MIN_POSITIVE));
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LatticeGrid;
    use approx::assert_relative_eq;
    use rand::prelude::*;

    fn unit_grid(n: usize) -> LatticeGrid {
        LatticeGrid::new(1.0, n).unwrap()
    }

    fn smooth_state(grid: &LatticeGrid, amp: f64) -> FpuState {
        let l = grid.period();
        let r = LatticeField::from_fn(grid.clone(), |x| {
            amp * (2.0 * std::f64::consts::PI * x / l).sin()
        });
        let rt = LatticeField::from_fn(grid.clone(), |x| {
            amp * 0.3 * (4.0 * std::f64::consts::PI * x / l).sin()
        });
        FpuState::new(r, rt, 0.0).unwrap()
    }

    #[test]
    fn zero_state_zero_energy() {
        let grid = unit_grid(64);
        let s = FpuState::new(LatticeField::zeros(grid.clone()), LatticeField::zeros(grid), 0.0).unwrap();
        let h = hamiltonian(&s, &Potential::cubic_normalized()).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn quadratic_hamiltonian_closed_form() {
        // V = a r²/2 and h = 1: H = ½‖(1/√(-Δ₁))rt‖² + (a/2)‖r‖².
        let grid = unit_grid(128);
        let a = 2.0;
        let p = Potential::Polynomial { coeffs: vec![a, 1e-30] };
        let s = smooth_state(&grid, 0.1);
        let h = hamiltonian(&s, &p).unwrap();
        // single-mode rt at frequency ξ₁ = 4π/L: ω = 2 sin(ξ₁/2)
        let l = grid.period();
        let xi = 4.0 * std::f64::consts::PI / l;
        let omega = 2.0 * (xi / 2.0).sin();
        let kin = 0.5 * (1.0 / omega) * (1.0 / omega) * s.rt.l2_norm().powi(2);
        let pot = 0.5 * a * s.r.l2_norm().powi(2);
        assert_relative_eq!(h, kin + pot, max_relative = 1e-10);
    }

    #[test]
    fn hamiltonian_rejects_nonzero_mean_rt() {
        let grid = unit_grid(64);
        let s = FpuState::new(
            LatticeField::zeros(grid.clone()),
            LatticeField::constant(grid, 0.5),
            0.0,
        )
        .unwrap();
        assert!(hamiltonian(&s, &Potential::cubic_normalized()).is_err());
    }

    #[test]
    fn hamiltonian_shift_invariant() {
        let grid = unit_grid(128);
        let p = Potential::Toda { alpha: 1.0, beta: 1.0 };
        let s = smooth_state(&grid, 0.05);
        let h0 = hamiltonian(&s, &p).unwrap();
        let shifted = FpuState::new(s.r.shift_sites(17), s.rt.shift_sites(17), 0.0).unwrap();
        let h1 = hamiltonian(&shifted, &p).unwrap();
        assert_relative_eq!(h0, h1, max_relative = 1e-12);
    }

    #[test]
    fn remainder_zero_for_cubic() {
        let grid = LatticeGrid::new(0.25, 64).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let r = LatticeField::new(
            grid.clone(),
            (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let rem = remainder(&r, &Potential::Cubic { a: 3.0, b: -2.0 }).unwrap();
        assert_eq!(rem.linf_norm(), 0.0);
    }

    #[test]
    fn remainder_matches_quartic_model() {
        // c₄ ≠ 0: R = (c₄/3)·r̃³ + O(h²r̃⁴)
        let grid = LatticeGrid::new(0.125, 64).unwrap();
        let c4 = 0.8;
        let p = Potential::Polynomial { coeffs: vec![1.0, 1.0, c4] };
        let r = LatticeField::from_fn(grid.clone(), |x| (x - 4.0).cos());
        let rem = remainder(&r, &p).unwrap();
        for (out, &v) in rem.values.iter().zip(&r.values) {
            assert_relative_eq!(*out, c4 / 3.0 * v * v * v, epsilon = 1e-9, max_relative = 1e-3);
        }
    }

    #[test]
    fn remainder_small_amplitude_scaling() {
        // with a fixed profile, ‖R - (V⁗(0)/3)r̃³‖ = O(h²); here we check the
        // raw remainder stays O(1) and the defect-to-model gap shrinks
        let p = Potential::Toda { alpha: 1.0, beta: 1.0 };
        let mut last_gap = f64::INFINITY;
        for k in 2..6 {
            let h = 0.5f64.powi(k);
            let grid = LatticeGrid::with_period(h, 16.0).unwrap();
            let r = LatticeField::from_fn(grid.clone(), |x| (x - 8.0).cos());
            let rem = remainder(&r, &p).unwrap();
            let gap = rem
                .values
                .iter()
                .zip(&r.values)
                .map(|(out, &v)| (out - v * v * v / 3.0).abs())
                .fold(0.0f64, f64::max);
            assert!(gap < last_gap);
            last_gap = gap;
        }
        // the gap is the next Taylor order: O(h²)
        assert!(last_gap < 1e-3);
    }

    #[test]
    fn leapfrog_zero_state_fixed_point() {
        let grid = unit_grid(64);
        let s = FpuState::new(LatticeField::zeros(grid.clone()), LatticeField::zeros(grid), 0.0).unwrap();
        let s1 = step_direct(&s, &Potential::cubic_normalized(), 0.1).unwrap();
        assert_eq!(s1.r.linf_norm(), 0.0);
        assert_eq!(s1.rt.linf_norm(), 0.0);
    }

    #[test]
    fn leapfrog_time_reversible() {
        let grid = unit_grid(128);
        let p = Potential::cubic_normalized();
        let s0 = smooth_state(&grid, 0.1);
        let mut s = s0.clone();
        for _ in 0..50 {
            s = step_direct(&s, &p, 0.05).unwrap();
        }
        for _ in 0..50 {
            s = step_direct(&s, &p, -0.05).unwrap();
        }
        let dr = s.r.sub(&s0.r).unwrap().linf_norm();
        let dv = s.rt.sub(&s0.rt).unwrap().linf_norm();
        assert!(dr < 1e-12 && dv < 1e-12, "reversibility defect {dr}, {dv}");
    }

    #[test]
    fn leapfrog_rejects_large_step() {
        let grid = unit_grid(64);
        let s = smooth_state(&grid, 0.1);
        let err = step_direct(&s, &Potential::cubic_normalized(), 10.0);
        assert!(matches!(err, Err(Error::UnstableStep { .. })));
    }

    #[test]
    fn leapfrog_energy_drift_second_order() {
        let grid = unit_grid(64);
        let p = Potential::Toda { alpha: 1.0, beta: 1.0 };
        let s = smooth_state(&grid, 0.2);
        let d1 = leapfrog_energy_drift(&s, &p, 0.05, 400).unwrap();
        let d2 = leapfrog_energy_drift(&s, &p, 0.025, 800).unwrap();
        let order = (d1 / d2).log2();
        assert!((order - 2.0).abs() < 0.5, "leapfrog energy order {order}");
    }
}
