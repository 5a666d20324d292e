//! Interaction-picture time integration of the coupled FPU system, the
//! decoupled FPU system, and KdV.
//!
//! All three share one Lawson-RK4 stepper: the stiff linear phase is applied
//! exactly through `propagators`, and only the nonlinearity is integrated by
//! Runge-Kutta, so with the nonlinearity off a step reproduces the linear
//! flow to roundoff for any dt. Quadratic products are formed alias-free on
//! a doubled grid and truncated back to the solution band; with both factors
//! band-limited the doubled grid holds every product mode, so the truncation
//! is the exact spectral projection.
//!
//! The solution band excludes the self-conjugate edge frequency -π/h (one
//! mode), which keeps every field real under the odd propagator phases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpu::FpuState;
use crate::grid::{dft_forward, dft_inverse, LatticeField, LatticeGrid, Spectrum};

use crate::multiplier::nabla_sigma;
use crate::phase::rotation;
use crate::potential::Potential;
use crate::propagators::{PhaseSymbol, Sign};

/// The pair (u_h⁺, u_h⁻) of counter-propagating components.
#[derive(Clone, Debug)]
pub struct SplitState {
    pub u_plus: LatticeField,
    pub u_minus: LatticeField,
    pub time: f64,
}

/// Solver metadata recorded with every trajectory; enough to reproduce the
/// run bit-for-bit on the same platform.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverMeta {
    pub scheme: String,
    pub system: String,
    pub dt: f64,
    pub dealiased: bool,
    pub h: f64,
    pub n: usize,
    pub potential: Option<Potential>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SplitState>,
    pub meta: SolverMeta,
}

#[derive(Clone, Debug)]
pub struct ScalarTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<LatticeField>,
    pub meta: SolverMeta,
}

/// u_{h,0}^± = ½{r₀ ∓ h²∇_h⁻¹ r₁}.
///
/// r₁ must have zero mean (∇_h⁻¹ acts on it); fields with measurable energy
/// at the self-conjugate edge frequency are rejected, below the gate that
/// single mode is projected out.
pub fn split_initial_data(r0: &LatticeField, r1: &LatticeField) -> Result<SplitState> {
    r0.grid.check_same(&r1.grid, "split initial data")?;
    let grid = &r0.grid;
    let h = grid.spacing();
    let n = grid.len();
    let mut s0 = dft_forward(r0);
    let mut s1 = dft_forward(r1);
    if !s1.zero_mean_within_gate() {
        return Err(Error::NonzeroMean(
            "r1 must have zero mean for ∇_h⁻¹; project it (fpu::project_zero_mean) first".into(),
        ));
    }
    for s in [&mut s0, &mut s1] {
        let scale = grid.period().sqrt() * s.l2_norm();
        let edge = s.coeffs[n / 2].norm();
        if edge > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Domain(
                "data carries energy at the self-conjugate edge frequency -π/h; \
                 refine the grid or filter the data"
                    .into(),
            ));
        }
        s.coeffs[n / 2] = Complex64::new(0.0, 0.0);
    }
    let mut up = Vec::with_capacity(n);
    let mut um = Vec::with_capacity(n);
    for j in 0..n {
        let xi = grid.xi(j);
        let sigma = nabla_sigma(h, xi);
        // h²∇_h⁻¹ r̂₁, zero on the zero mode
        let q = if sigma == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            s1.coeffs[j] * Complex64::new(0.0, -h * h / sigma)
        };
        up.push(0.5 * (s0.coeffs[j] - q));
        um.push(0.5 * (s0.coeffs[j] + q));
    }
    Ok(SplitState {
        u_plus: dft_inverse(&Spectrum { grid: grid.clone(), coeffs: up }),
        u_minus: dft_inverse(&Spectrum { grid: grid.clone(), coeffs: um }),
        time: 0.0,
    })
}

/// r̃(t) = e^{-(t/h²)∂_h} u⁺ + e^{(t/h²)∂_h} u⁻.
pub fn reconstruct_r(s: &SplitState) -> LatticeField {
    let (rp, rm) = translated_components(s);
    dft_inverse(&Spectrum {
        grid: s.u_plus.grid.clone(),
        coeffs: rp.iter().zip(&rm).map(|(a, b)| a + b).collect(),
    })
}

/// (r̃, ∂_t r̃): the time derivative uses ∂_t r̃ = -(1/h²)∇_h(r̃⁺ - r̃⁻),
/// which holds for the split evolution because the Duhamel forcing cancels
/// between the channels.
pub fn reconstruct_state(s: &SplitState) -> FpuState {
    let grid = s.u_plus.grid.clone();
    let h = grid.spacing();
    let (rp, rm) = translated_components(s);
    let r = dft_inverse(&Spectrum {
        grid: grid.clone(),
        coeffs: rp.iter().zip(&rm).map(|(a, b)| a + b).collect(),
    });
    let coeffs = (0..grid.len())
        .map(|j| {
            let sigma = nabla_sigma(h, grid.xi(j));
            (rp[j] - rm[j]) * Complex64::new(0.0, -sigma / (h * h))
        })
        .collect();
    let rt = dft_inverse(&Spectrum { grid: grid.clone(), coeffs });
    FpuState { r, rt, time: s.time }
}

fn translated_components(s: &SplitState) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = &s.u_plus.grid;
    let h = grid.spacing();
    let speed = s.time / (h * h);
    let sp = dft_forward(&s.u_plus);
    let sm = dft_forward(&s.u_minus);
    let rp = grid
        .frequencies()
        .iter()
        .zip(&sp.coeffs)
        .map(|(&xi, c)| c * rotation(-speed, xi))
        .collect();
    let rm = grid
        .frequencies()
        .iter()
        .zip(&sm.coeffs)
        .map(|(&xi, c)| c * rotation(speed, xi))
        .collect();
    (rp, rm)
}

// ---------------------------------------------------------------------------
// Lawson-RK4 stepper
// ---------------------------------------------------------------------------

enum Nonlinearity {
    /// Coupled FPU: cross terms and the h²-weighted remainder.
    Coupled(Potential),
    /// Decoupled FPU: each channel self-interacts only.
    Decoupled,
    /// Single-channel KdV with transport symbol iξ.
    Kdv(Sign),
    /// Nonlinearity switched off; the step reduces to the exact linear flow.
    None,
}

struct Stepper {
    grid: LatticeGrid,
    pad: LatticeGrid,
    xi: Vec<f64>,
    /// s_h(ξ) for FPU, ξ³/24 for KdV.
    dispersion: Vec<f64>,
    /// gradient symbol applied to the quadratic term: σ for ∇_h, ξ for ∂_x.
    grad: Vec<f64>,
    band: usize,
    nonlin: Nonlinearity,
}

/// Pair-of-channels spectral state used inside the stepper.
#[derive(Clone)]
struct SpecPair {
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl SpecPair {
    fn axpy(&self, c: f64, other: &SpecPair) -> SpecPair {
        SpecPair {
            plus: self.plus.iter().zip(&other.plus).map(|(a, b)| a + c * b).collect(),
            minus: self.minus.iter().zip(&other.minus).map(|(a, b)| a + c * b).collect(),
        }
    }
}

impl Stepper {
    fn new(grid: &LatticeGrid, nonlin: Nonlinearity) -> Result<Self> {
        let h = grid.spacing();
        let n = grid.len();
        let pad = LatticeGrid::new(h / 2.0, 2 * n)?;
        let sym = PhaseSymbol::new(h);
        let kdv = matches!(nonlin, Nonlinearity::Kdv(_));
        let xi: Vec<f64> = grid.frequencies().to_vec();
        let dispersion = xi
            .iter()
            .map(|&x| if kdv { PhaseSymbol::airy(x) } else { sym.s(x) })
            .collect();
        let grad = xi
            .iter()
            .map(|&x| if kdv { x } else { nabla_sigma(h, x) })
            .collect();
        if let Nonlinearity::Coupled(p) = &nonlin {
            if !p.is_normalized() {
                return Err(Error::InvalidConfig(
                    "the coupled solver integrates the normalized system (a = b = 1); \
                     call Potential::normalize first"
                        .into(),
                ));
            }
        }
        Ok(Self { grid: grid.clone(), pad, xi, dispersion, grad, band: n / 2, nonlin })
    }

    fn embed(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let m = 2 * n;
        let mut wide = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..n {
            let k = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            if k.unsigned_abs() as usize >= self.band {
                continue;
            }
            let jj = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
            wide[jj] = a[j];
        }
        wide
    }

    fn truncate(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let m = 2 * n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, slot) in out.iter_mut().enumerate() {
            let k = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            if k.unsigned_abs() as usize >= self.band {
                continue;
            }
            let jj = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
            *slot = spec[jj];
        }
        out
    }

    /// Exact square of a band-limited spectrum, truncated to the band: the
    /// doubled grid holds every product mode, so no aliasing occurs.
    fn padded_square(&self, a: &[Complex64]) -> Vec<Complex64> {
        let mut wide = self.embed(a);
        self.pad.dft_inverse_buf(&mut wide);
        for v in &mut wide {
            *v = *v * *v;
        }
        self.pad.dft_forward_buf(&mut wide);
        self.truncate(&wide)
    }

    /// Pointwise map of the supersampled field of `a`, truncated back.
    fn padded_map(&self, a: &[Complex64], f: impl Fn(f64) -> Result<f64>) -> Result<Vec<Complex64>> {
        let mut wide = self.embed(a);
        self.pad.dft_inverse_buf(&mut wide);
        for v in wide.iter_mut() {
            *v = Complex64::new(f(v.re)?, 0.0);
        }
        self.pad.dft_forward_buf(&mut wide);
        Ok(self.truncate(&wide))
    }

    /// Nonlinear part in spectral space at absolute time t.
    fn nonlin_eval(&self, t: f64, u: &SpecPair) -> Result<SpecPair> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        match &self.nonlin {
            Nonlinearity::None => Ok(SpecPair {
                plus: vec![Complex64::new(0.0, 0.0); n],
                minus: vec![Complex64::new(0.0, 0.0); n],
            }),
            Nonlinearity::Kdv(sign) => {
                let sq = self.padded_square(&u.plus);
                let sg = sign.as_f64();
                let out = (0..n)
                    .map(|j| sq[j] * Complex64::new(0.0, self.grad[j]) * (-0.25 * sg))
                    .collect();
                Ok(SpecPair { plus: out, minus: vec![Complex64::new(0.0, 0.0); n] })
            }
            Nonlinearity::Decoupled => {
                let sqp = self.padded_square(&u.plus);
                let sqm = self.padded_square(&u.minus);
                let mk = |sq: &[Complex64], sg: f64| -> Vec<Complex64> {
                    (0..n)
                        .map(|j| sq[j] * Complex64::new(0.0, self.grad[j]) * (-0.25 * sg))
                        .collect()
                };
                Ok(SpecPair { plus: mk(&sqp, 1.0), minus: mk(&sqm, -1.0) })
            }
            Nonlinearity::Coupled(potential) => {
                let speed = t / (h * h);
                // cross terms e^{±(2t/h²)∂_h} u∓ at the exact stage time
                let qp: Vec<Complex64> = (0..n)
                    .map(|j| u.plus[j] + u.minus[j] * rotation(2.0 * speed, self.xi[j]))
                    .collect();
                let qm: Vec<Complex64> = (0..n)
                    .map(|j| u.minus[j] + u.plus[j] * rotation(-2.0 * speed, self.xi[j]))
                    .collect();
                let mut sqp = self.padded_square(&qp);
                let mut sqm = self.padded_square(&qm);
                // higher-order remainder h²e^{±(t/h²)∂_h} R(r̃(t))
                let needs_remainder = !matches!(potential, Potential::Cubic { .. });
                if needs_remainder {
                    let rt: Vec<Complex64> = (0..n)
                        .map(|j| {
                            u.plus[j] * rotation(-speed, self.xi[j])
                                + u.minus[j] * rotation(speed, self.xi[j])
                        })
                        .collect();
                    let scale = 2.0 / h.powi(6);
                    let h2 = h * h;
                    let rem = self.padded_map(&rt, |v| {
                        potential.nonlinearity_defect(h2 * v).map(|d| scale * d)
                    })?;
                    for j in 0..n {
                        let re_p = rem[j] * rotation(speed, self.xi[j]);
                        let re_m = rem[j] * rotation(-speed, self.xi[j]);
                        sqp[j] += h2 * re_p;
                        sqm[j] += h2 * re_m;
                    }
                }
                let out_p = (0..n)
                    .map(|j| sqp[j] * Complex64::new(0.0, self.grad[j]) * -0.25)
                    .collect();
                let out_m = (0..n)
                    .map(|j| sqm[j] * Complex64::new(0.0, self.grad[j]) * 0.25)
                    .collect();
                Ok(SpecPair { plus: out_p, minus: out_m })
            }
        }
    }

    /// Exact linear propagator over a step δ applied to the pair.
    fn linear(&self, delta: f64, u: &SpecPair) -> SpecPair {
        // the single KdV channel lives in the plus slot and carries its own ±
        let plus_delta = match &self.nonlin {
            Nonlinearity::Kdv(sign) => sign.as_f64() * delta,
            _ => delta,
        };
        let plus = u
            .plus
            .iter()
            .zip(&self.dispersion)
            .map(|(c, &s)| c * rotation(plus_delta, s))
            .collect();
        let minus = match self.nonlin {
            Nonlinearity::Kdv(_) => u.minus.clone(),
            _ => u
                .minus
                .iter()
                .zip(&self.dispersion)
                .map(|(c, &s)| c * rotation(-delta, s))
                .collect(),
        };
        SpecPair { plus, minus }
    }

    /// One Lawson-RK4 step from absolute time t.
    fn step(&self, t: f64, u: &SpecPair, dt: f64) -> Result<SpecPair> {
        let half = 0.5 * dt;
        let a = self.nonlin_eval(t, u)?;
        let u_half = self.linear(half, u);
        let ea = self.linear(half, &a);
        let b = self.nonlin_eval(t + half, &u_half.axpy(half, &ea))?;
        let c = self.nonlin_eval(t + half, &u_half.axpy(half, &b))?;
        let u_full = self.linear(half, &u_half);
        let ec = self.linear(half, &c);
        let d = self.nonlin_eval(t + dt, &u_full.axpy(dt, &ec))?;
        let ea_full = self.linear(dt, &a);
        let eb = self.linear(half, &b);
        let mut out = u_full;
        out = out.axpy(dt / 6.0, &ea_full);
        out = out.axpy(dt / 3.0, &eb);
        out = out.axpy(dt / 3.0, &ec);
        out = out.axpy(dt / 6.0, &d);
        Ok(out)
    }
}

fn pair_from_state(s: &SplitState) -> SpecPair {
    SpecPair {
        plus: dft_forward(&s.u_plus).coeffs,
        minus: dft_forward(&s.u_minus).coeffs,
    }
}

fn state_from_pair(grid: &LatticeGrid, p: &SpecPair, time: f64) -> Result<SplitState> {
    let u_plus = dft_inverse(&Spectrum { grid: grid.clone(), coeffs: p.plus.clone() });
    let u_minus = dft_inverse(&Spectrum { grid: grid.clone(), coeffs: p.minus.clone() });
    if !u_plus.is_finite() || !u_minus.is_finite() {
        return Err(Error::NonFinite(format!("split state at t = {time}")));
    }
    Ok(SplitState { u_plus, u_minus, time })
}

/// One step of the coupled FPU system (Zabusky-Kruskal split form with cross
/// terms and the h²-weighted remainder).
pub fn step_coupled(s: &SplitState, potential: &Potential, dt: f64) -> Result<SplitState> {
    let stepper = Stepper::new(&s.u_plus.grid, Nonlinearity::Coupled(potential.clone()))?;
    let out = stepper.step(s.time, &pair_from_state(s), dt)?;
    state_from_pair(&s.u_plus.grid, &out, s.time + dt)
}

/// One step of the decoupled FPU system (cross terms and remainder dropped).
pub fn step_decoupled(s: &SplitState, dt: f64) -> Result<SplitState> {
    let stepper = Stepper::new(&s.u_plus.grid, Nonlinearity::Decoupled)?;
    let out = stepper.step(s.time, &pair_from_state(s), dt)?;
    state_from_pair(&s.u_plus.grid, &out, s.time + dt)
}

/// One step of w_t ± (1/24)w_xxx ∓ ¼(w²)_x = 0 in Duhamel form.
pub fn step_kdv(w: &LatticeField, dt: f64, sign: Sign) -> Result<LatticeField> {
    let stepper = Stepper::new(&w.grid, Nonlinearity::Kdv(sign))?;
    let pair = SpecPair {
        plus: dft_forward(w).coeffs,
        minus: vec![Complex64::new(0.0, 0.0); w.grid.len()],
    };
    let out = stepper.step(0.0, &pair, dt)?;
    let f = dft_inverse(&Spectrum { grid: w.grid.clone(), coeffs: out.plus });
    if !f.is_finite() {
        return Err(Error::NonFinite("kdv step".into()));
    }
    Ok(f)
}

/// Which split system `evolve` integrates.
pub enum System<'a> {
    Coupled(&'a Potential),
    Decoupled,
    /// Nonlinearity off; each channel follows the exact linear flow.
    Linear,
}

/// Evolve over [-T, T] (forward and backward runs from t = 0), sampling the
/// state every `sample_every` steps plus both endpoints.
pub fn evolve(
    system: System<'_>,
    init: &SplitState,
    t_max: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidConfig("evolution horizon must be positive".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    if init.time != 0.0 {
        return Err(Error::InvalidConfig(
            "evolve integrates from t = 0; the initial state must carry time 0".into(),
        ));
    }
    let grid = &init.u_plus.grid;
    let (nonlin, name, pot) = match system {
        System::Coupled(p) => (Nonlinearity::Coupled(p.clone()), "coupled_fpu", Some(p.clone())),
        System::Decoupled => (Nonlinearity::Decoupled, "decoupled_fpu", None),
        System::Linear => (Nonlinearity::None, "linear_fpu", None),
    };
    let stepper = Stepper::new(grid, nonlin)?;
    let steps = (t_max / dt).ceil() as usize;
    let dt_eff = t_max / steps as f64;
    let sample_every = sample_every.max(1);

    let run = |direction: f64| -> Result<(Vec<f64>, Vec<SplitState>)> {
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut u = pair_from_state(init);
        for k in 0..steps {
            let t = direction * dt_eff * k as f64;
            u = stepper.step(t, &u, direction * dt_eff)?;
            let done = k + 1;
            if done % sample_every == 0 || done == steps {
                let t_next = direction * dt_eff * done as f64;
                times.push(t_next);
                states.push(state_from_pair(grid, &u, t_next)?);
            }
        }
        Ok((times, states))
    };

    let (ft, fs) = run(1.0)?;
    let (bt, bs) = run(-1.0)?;
    let mut times = Vec::with_capacity(ft.len() + bt.len() + 1);
    let mut states = Vec::with_capacity(times.capacity());
    for (t, s) in bt.into_iter().zip(bs).rev() {
        times.push(t);
        states.push(s);
    }
    times.push(0.0);
    states.push(SplitState { time: 0.0, ..init.clone() });
    for (t, s) in ft.into_iter().zip(fs) {
        times.push(t);
        states.push(s);
    }
    Ok(Trajectory {
        times,
        states,
        meta: SolverMeta {
            scheme: "lawson_rk4".into(),
            system: name.into(),
            dt: dt_eff,
            dealiased: true,
            h: grid.spacing(),
            n: grid.len(),
            potential: pot,
        },
    })
}

/// Evolve one KdV channel over [-T, T].
pub fn evolve_kdv(
    w0: &LatticeField,
    sign: Sign,
    t_max: f64,
    dt: f64,
    sample_every: usize,
) -> Result<ScalarTrajectory> {
    if !(t_max > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidConfig("horizon and dt must be positive".into()));
    }
    let grid = &w0.grid;
    let stepper = Stepper::new(grid, Nonlinearity::Kdv(sign))?;
    let steps = (t_max / dt).ceil() as usize;
    let dt_eff = t_max / steps as f64;
    let sample_every = sample_every.max(1);
    let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];

    let run = |direction: f64| -> Result<(Vec<f64>, Vec<LatticeField>)> {
        let mut times = Vec::new();
        let mut fields = Vec::new();
        let mut u = SpecPair { plus: dft_forward(w0).coeffs, minus: zeros.clone() };
        for k in 0..steps {
            let t = direction * dt_eff * k as f64;
            u = stepper.step(t, &u, direction * dt_eff)?;
            let done = k + 1;
            if done % sample_every == 0 || done == steps {
                let f = dft_inverse(&Spectrum { grid: grid.clone(), coeffs: u.plus.clone() });
                if !f.is_finite() {
                    return Err(Error::NonFinite(format!("kdv run at t = {}", direction * dt_eff * done as f64)));
                }
                times.push(direction * dt_eff * done as f64);
                fields.push(f);
            }
        }
        Ok((times, fields))
    };

    let (ft, fs) = run(1.0)?;
    let (bt, bs) = run(-1.0)?;
    let mut times = Vec::new();
    let mut fields = Vec::new();
    for (t, f) in bt.into_iter().zip(bs).rev() {
        times.push(t);
        fields.push(f);
    }
    times.push(0.0);
    fields.push(w0.clone());
    for (t, f) in ft.into_iter().zip(fs) {
        times.push(t);
        fields.push(f);
    }
    Ok(ScalarTrajectory {
        times,
        fields,
        meta: SolverMeta {
            scheme: "lawson_rk4".into(),
            system: "kdv".into(),
            dt: dt_eff,
            dealiased: true,
            h: grid.spacing(),
            n: grid.len(),
            potential: None,
        },
    })
}
