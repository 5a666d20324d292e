//! Experiment drivers: data generation, h-sweeps, rate fits, and reports.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fpu::{hamiltonian, leapfrog_stability_bound, rescale_to_chain, step_direct, FpuState};
use crate::grid::{LatticeField, LatticeGrid};
use crate::harness::config::{DataKind, ExperimentConfig, ExperimentKind, Horizon};
use crate::harness::data::{generate_hs_data, profile_field, smooth_data, smooth_pair_data, soliton_data, HsData};
use crate::harness::rate::{fit_rate, RatePoint};
use crate::harness::report::{CheckLine, Report, SeriesRow, SweepPoint, Timing};
use crate::interp::{
    continuum_error, interpolant_derivative, interpolate, mixed_norm_s, seam_mass_fraction,
    LineField,
};
use crate::norms::{pair_norm, sobolev_norm};
use crate::potential::Potential;
use crate::propagators::{airy_flow_spec, apply_fpu_flow, Sign};
use crate::solvers::{evolve, evolve_kdv, reconstruct_r, reconstruct_state, split_initial_data, System};
use crate::verifiers::bilinear::{bilinear_sup, ceiling_i, ceiling_ii, BilinearKind, BilinearQuery};
use crate::verifiers::kernels::{dispersive_bound, kernel_eval, piecewise_bound, KernelQuery};
use crate::verifiers::xsb::{
    high_frequency_data, linear_flow_trajectory, nyquist_dt, product_gain_check, xsb_norm,
    PhaseKind, XsbParams,
};

/// A finished experiment: the deterministic report, the long-format series
/// rows, and the isolated wall-clock data.
pub struct ExperimentOutput {
    pub report: Report,
    pub series: Vec<SeriesRow>,
    pub timing: Timing,
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::ContinuumLimit => run_continuum_limit(cfg),
        ExperimentKind::SmallAmplitude => run_small_amplitude(cfg),
        ExperimentKind::Decoupling => run_decoupling(cfg),
        ExperimentKind::LinearComparison => run_linear_comparison(cfg),
        ExperimentKind::Conservation => run_conservation(cfg),
        ExperimentKind::Kernels => run_kernels(cfg),
        ExperimentKind::Bilinear => run_bilinear(cfg),
        ExperimentKind::XsbFailure => run_xsb_failure(cfg),
        ExperimentKind::Remainder => run_remainder(cfg),
    }
}

/// Scaling of the higher-order remainder's contribution: the normalized
/// Toda and cubic potentials share the quadratic model exactly, so the
/// trajectory difference between their coupled runs isolates the h²𝓡 term.
pub fn run_remainder(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let toda = Potential::Toda { alpha: 1.0, beta: 1.0 };
    let cubic = Potential::cubic_normalized();
    let t_max = match cfg.horizon {
        Horizon::Fixed(t) => t,
        Horizon::Auto => 0.5,
    };
    report.horizon = Some(t_max);

    for &h in &cfg.h_list {
        let start = Instant::now();
        let grid = LatticeGrid::with_period(h, cfg.box_length)?;
        let d = data_for(cfg, &grid)?;
        let init = split_initial_data(&d.r0, &d.r1)?;
        let dt = dt_resolved(h, cfg.dt_factor);
        let stride = sample_stride(t_max, dt, cfg.samples.max(1025));
        let (with_r, without_r) = rayon::join(
            || evolve(System::Coupled(&toda), &init, t_max, dt, stride),
            || evolve(System::Coupled(&cubic), &init, t_max, dt, stride),
        );
        let (with_r, without_r) = (with_r?, without_r?);
        let mut diff = 0.0f64;
        for (i, &t) in with_r.times.iter().enumerate() {
            let dp = with_r.states[i].u_plus.sub(&without_r.states[i].u_plus)?.l2_norm();
            let dm = with_r.states[i].u_minus.sub(&without_r.states[i].u_minus)?.l2_norm();
            let e = dp.max(dm);
            diff = diff.max(e);
            series.push(SeriesRow {
                experiment: cfg.experiment.name().into(),
                h,
                t,
                quantity: "remainder_contribution".into(),
                value: e,
            });
        }
        let mut norms = BTreeMap::new();
        norms.insert("data_pair_hs".into(), pair_norm(&d.r0, &d.q, cfg.s)?);
        report.points.push(SweepPoint {
            h,
            error: diff,
            norms,
            wrap_diag: seam_mass_fraction(&d.r0, 1.0 / 16.0),
            excluded: None,
        });
        timing.wall_s.insert(format!("h={h}"), start.elapsed().as_secs_f64());
    }
    apply_error_floor(&mut report.points, |h| dt_resolved(h, cfg.dt_factor));
    fit_sweep(&mut report);
    if let Some(fit) = &report.fit {
        report.checks.push(CheckLine::ge("remainder_slope", fit.slope, 1.9));
    }
    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

fn dt_policy(h: f64, factor: f64) -> f64 {
    h.min(0.1) * factor
}

/// Stride so that a [-T, T] run yields at least `want` samples.
fn sample_stride(t_max: f64, dt: f64, want: usize) -> usize {
    let steps = (t_max / dt).ceil() as usize;
    (2 * steps / want.max(2)).max(1)
}

fn data_for(cfg: &ExperimentConfig, grid: &LatticeGrid) -> Result<HsData> {
    match &cfg.data {
        DataKind::RandomHs => generate_hs_data(grid, cfg.s, cfg.r_bound, cfg.seed),
        DataKind::SmoothPair { band } => {
            smooth_pair_data(grid, *band, cfg.s, cfg.r_bound, cfg.seed)
        }
        DataKind::Soliton { speed } => soliton_data(grid, *speed),
    }
}

/// Step size for coupled-system runs whose result is a small difference:
/// dt ∝ h² keeps the cross-term phases 2ξt/h² resolved for band-limited
/// data, where the policy step dt ∝ h would alias them into quadrature
/// noise far above the measured quantity.
fn dt_resolved(h: f64, factor: f64) -> f64 {
    (h * h * factor).min(dt_policy(h, factor))
}

/// Resolves the horizon: fixed value, or halve from 1.0 until the coupled
/// H^s norm stays within 2R over [-T, T] at the largest h.
fn resolve_horizon(cfg: &ExperimentConfig, potential: &Potential) -> Result<(f64, Vec<String>)> {
    let mut notes = Vec::new();
    if let Horizon::Fixed(t) = cfg.horizon {
        return Ok((t, notes));
    }
    let h = cfg.h_list[0];
    let grid = LatticeGrid::with_period(h, cfg.box_length)?;
    let d = data_for(cfg, &grid)?;
    let init = split_initial_data(&d.r0, &d.r1)?;
    let dt = dt_policy(h, cfg.dt_factor);
    let cap = 2.0 * cfg.r_bound;
    let mut t_max = 1.0;
    while t_max >= 1.0 / 16.0 {
        let stride = sample_stride(t_max, dt, 16);
        let ok = match evolve(System::Coupled(potential), &init, t_max, dt, stride) {
            Ok(traj) => traj
                .states
                .iter()
                .map(|s| pair_norm(&s.u_plus, &s.u_minus, cfg.s).unwrap_or(f64::INFINITY))
                .fold(0.0f64, f64::max)
                <= cap,
            Err(_) => false,
        };
        if ok {
            notes.push(format!("auto horizon settled at T = {t_max}"));
            return Ok((t_max, notes));
        }
        t_max *= 0.5;
    }
    notes.push("auto horizon hit the floor T = 1/16".into());
    Ok((1.0 / 16.0, notes))
}

/// dt cap keeping the explicit quadratic stage inside the RK4 stability
/// region on a spectral grid: dt·ξ_max·|w|_∞/2 ≤ 1.4.
fn kdv_dt_cap(grid: &LatticeGrid, amplitude: f64) -> f64 {
    let xi_max = std::f64::consts::PI / grid.spacing();
    2.8 / (xi_max * amplitude.max(0.1))
}

struct ContinuumPoint {
    sweep: SweepPoint,
    series: Vec<SeriesRow>,
    wall_s: f64,
    ratio_minus: f64,
}

fn continuum_point(
    cfg: &ExperimentConfig,
    potential: &Potential,
    h: f64,
    t_max: f64,
) -> Result<ContinuumPoint> {
    let start = Instant::now();
    let grid = LatticeGrid::with_period(h, cfg.box_length)?;
    let d = data_for(cfg, &grid)?;
    let wrap = seam_mass_fraction(&d.r0, 1.0 / 16.0);
    if matches!(cfg.data, DataKind::Soliton { .. }) && wrap > 1e-6 {
        return Ok(ContinuumPoint {
            sweep: SweepPoint {
                h,
                error: f64::NAN,
                norms: BTreeMap::new(),
                wrap_diag: wrap,
                excluded: Some(format!("wrap interference: seam mass {wrap:.3e} above 1e-6")),
            },
            series: Vec::new(),
            wall_s: start.elapsed().as_secs_f64(),
            ratio_minus: 0.0,
        });
    }
    let init = split_initial_data(&d.r0, &d.r1)?;
    let dt = dt_policy(h, cfg.dt_factor);
    let stride = sample_stride(t_max, dt, cfg.samples);
    let coupled = evolve(System::Coupled(potential), &init, t_max, dt, stride)?;

    // KdV on the refined box from the interpolated split data
    let wp0 = interpolate(&init.u_plus, cfg.rho)?;
    let wm0 = interpolate(&init.u_minus, cfg.rho)?;
    let amp = wp0.field.linf_norm().max(wm0.field.linf_norm());
    let dt_kdv = dt.min(kdv_dt_cap(wp0.grid(), amp));
    let (kdv_p, kdv_m) = rayon::join(
        || evolve_kdv(&wp0.field, Sign::Plus, t_max, dt_kdv, sample_stride(t_max, dt_kdv, cfg.samples)),
        || evolve_kdv(&wm0.field, Sign::Minus, t_max, dt_kdv, sample_stride(t_max, dt_kdv, cfg.samples)),
    );
    let (kdv_p, kdv_m) = (kdv_p?, kdv_m?);

    // align on the coupled sample times (the KdV stride may differ)
    let mut times = Vec::new();
    let mut lhr = Vec::new();
    let mut wp = Vec::new();
    let mut wm = Vec::new();
    let mut ratio_minus = 0.0f64;
    let mut sup_plus = 0.0f64;
    for (i, &t) in coupled.times.iter().enumerate() {
        let j = match kdv_p.times.iter().position(|&tt| (tt - t).abs() < 1e-12) {
            Some(j) => j,
            None => continue,
        };
        times.push(t);
        lhr.push(interpolate(&reconstruct_r(&coupled.states[i]), cfg.rho)?);
        wp.push(LineField::from_field(kdv_p.fields[j].clone(), cfg.rho));
        wm.push(LineField::from_field(kdv_m.fields[j].clone(), cfg.rho));
        sup_plus = sup_plus.max(coupled.states[i].u_plus.l2_norm());
        ratio_minus = ratio_minus.max(coupled.states[i].u_minus.l2_norm());
    }
    if times.len() < 3 {
        return Err(Error::InvalidConfig("coupled and KdV sample grids failed to align".into()));
    }
    let error = continuum_error(&times, &lhr, &wp, &wm, h)?;
    let ratio_minus = if sup_plus > 0.0 { ratio_minus / sup_plus } else { 0.0 };

    let mut norms = BTreeMap::new();
    norms.insert("data_pair_hs".into(), pair_norm(&d.r0, &d.q, cfg.s)?);
    norms.insert("r0_l2".into(), d.r0.l2_norm());
    let mut series = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let e = continuum_error(&times[k..k + 1], &lhr[k..k + 1], &wp[k..k + 1], &wm[k..k + 1], h)?;
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t,
            quantity: "continuum_error".into(),
            value: e,
        });
    }
    Ok(ContinuumPoint {
        sweep: SweepPoint { h, error, norms, wrap_diag: wrap, excluded: None },
        series,
        wall_s: start.elapsed().as_secs_f64(),
        ratio_minus,
    })
}

/// Scheme-error floor: points below 10× the temporal budget are excluded
/// from the fit so the asymptotic rate is not contaminated.
fn apply_error_floor(points: &mut [SweepPoint], dt_of_h: impl Fn(f64) -> f64) {
    for p in points.iter_mut() {
        if p.excluded.is_some() {
            continue;
        }
        let dt = dt_of_h(p.h);
        let budget = dt.powi(4) + 1e-13;
        if p.error < 10.0 * budget {
            p.excluded = Some(format!("error below 10x temporal budget {budget:.3e}"));
        }
    }
}

fn fit_sweep(report: &mut Report) {
    let pts: Vec<RatePoint> = report
        .points
        .iter()
        .filter(|p| p.excluded.is_none())
        .map(|p| RatePoint { h: p.h, error: p.error })
        .collect();
    match fit_rate(&pts) {
        Ok(fit) => report.fit = Some(fit),
        Err(e) => {
            report.degenerate = true;
            report.notes.push(format!("rate fit degenerate: {e}"));
        }
    }
}

pub fn run_continuum_limit(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let (potential, _) = cfg.potential.normalize()?;
    let (t_max, notes) = resolve_horizon(cfg, &potential)?;
    report.notes.extend(notes);
    report.horizon = Some(t_max);

    let mut worst_minus = 0.0f64;
    for &h in &cfg.h_list {
        let point = continuum_point(cfg, &potential, h, t_max)?;
        timing.wall_s.insert(format!("h={h}"), point.wall_s);
        series.extend(point.series);
        worst_minus = worst_minus.max(point.ratio_minus);
        report.points.push(point.sweep);
    }
    apply_error_floor(&mut report.points, |h| dt_policy(h, cfg.dt_factor));
    fit_sweep(&mut report);
    if let Some(fit) = &report.fit {
        report.checks.push(CheckLine::ge("continuum_slope", fit.slope, 0.36));
    }
    if matches!(cfg.data, DataKind::Soliton { .. }) {
        report.constants.insert("u_minus_over_u_plus".into(), worst_minus);
        report.checks.push(CheckLine::le("soliton_u_minus_channel", worst_minus, 1e-2));
    }
    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

pub fn run_small_amplitude(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let (potential, _) = cfg.potential.normalize()?;
    let (t_max, notes) = resolve_horizon(cfg, &potential)?;
    report.notes.extend(notes);
    report.horizon = Some(t_max);

    // the rescaling r(t,x) = h²r̃(h³t, hx) turns the continuum error into
    // the chain error exactly, with the extra factor h^{3/2} from the
    // measure of the unscaled lattice
    for &h in &cfg.h_list {
        let point = continuum_point(cfg, &potential, h, t_max)?;
        timing.wall_s.insert(format!("h={h}"), point.wall_s);
        let mut sweep = point.sweep;
        sweep.error *= h.powf(1.5);
        for mut row in point.series {
            row.experiment = cfg.experiment.name().into();
            row.quantity = "rescaled_error".into();
            row.value *= h.powf(1.5);
            series.push(row);
        }
        report.points.push(sweep);
    }
    apply_error_floor(&mut report.points, |h| dt_policy(h, cfg.dt_factor));
    fit_sweep(&mut report);
    if let Some(fit) = &report.fit {
        let floor = 1.5 + 2.0 * cfg.s / 5.0 - 0.05;
        report.checks.push(CheckLine::ge("small_amplitude_slope", fit.slope, floor));
    }

    // direct-integrator cross-check at the two largest h (cost guard)
    for &h in cfg.h_list.iter().take(2) {
        let start = Instant::now();
        let (diff, tol) = chain_cross_check(cfg, &potential, h, t_max)?;
        timing.wall_s.insert(format!("chain_check_h={h}"), start.elapsed().as_secs_f64());
        report.constants.insert(format!("chain_diff_h={h}"), diff);
        report.constants.insert(format!("chain_tol_h={h}"), tol);
        report.checks.push(CheckLine::le(format!("chain_cross_check_h={h}"), diff, tol));
    }
    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

/// Integrates the unscaled chain with leapfrog over [0, T/h³] and compares
/// h²r̃(h³t, hx) from the spectral solver against it. The tolerance combines
/// the leapfrog's own Richardson error estimate with the spectral budget.
fn chain_cross_check(
    cfg: &ExperimentConfig,
    potential: &Potential,
    h: f64,
    t_max: f64,
) -> Result<(f64, f64)> {
    let grid = LatticeGrid::with_period(h, cfg.box_length)?;
    // a scheme cross-validation wants data whose oscillations both schemes
    // resolve; band-limited pair data and the h² step give that
    let d = smooth_pair_data(&grid, 6, cfg.s, cfg.r_bound, cfg.seed)?;
    let init = split_initial_data(&d.r0, &d.r1)?;
    let dt = dt_resolved(h, cfg.dt_factor);
    let stride = sample_stride(t_max, dt, 17);
    let coupled = evolve(System::Coupled(potential), &init, t_max, dt, stride)?;

    let unit = LatticeGrid::new(1.0, grid.len())?;
    let (r_c, rt_c) = rescale_to_chain(&d.r0, &d.r1, &unit)?;
    let state0 = FpuState::new(r_c, rt_c, 0.0)?;
    let bound = leapfrog_stability_bound(&state0, potential)?;
    let dt_lf = 0.4 * bound;

    let run_chain = |dt_lf: f64| -> Result<Vec<(f64, LatticeField)>> {
        // forward samples at chain times t_j = t/h³ for positive samples
        let mut out = Vec::new();
        let mut state = state0.clone();
        for (&t, _) in coupled.times.iter().zip(&coupled.states).filter(|(&t, _)| t > 0.0) {
            let target = t / (h * h * h);
            let remaining = target - state.time;
            let steps = (remaining / dt_lf).ceil().max(1.0) as usize;
            let step = remaining / steps as f64;
            for _ in 0..steps {
                state = step_direct(&state, potential, step)?;
            }
            out.push((t, state.r.clone()));
        }
        Ok(out)
    };
    let chain = run_chain(dt_lf)?;
    let chain_half = run_chain(0.5 * dt_lf)?;

    let mut diff = 0.0f64;
    let mut lf_err = 0.0f64;
    for (k, (t, r_chain)) in chain.iter().enumerate() {
        let i = coupled.times.iter().position(|tt| tt == t).unwrap();
        let r_spec = reconstruct_r(&coupled.states[i]);
        let rescaled = LatticeField::new(
            unit.clone(),
            r_spec.values.iter().map(|v| h * h * v).collect(),
        )?;
        diff = diff.max(rescaled.sub(r_chain)?.l2_norm());
        lf_err = lf_err.max(chain_half[k].1.sub(r_chain)?.l2_norm());
    }
    // Richardson: the dt/2 run carries ~1/4 of the leapfrog error; the
    // spectral side contributes its dt⁴ budget at the chain's amplitude h²
    let spectral_budget = dt.powi(4) * h * h * (grid.len() as f64).sqrt();
    let tol = 3.0 * (lf_err * 4.0 / 3.0 + spectral_budget) + 1e-12;
    Ok((diff, tol))
}

pub fn run_decoupling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let (potential, _) = cfg.potential.normalize()?;
    let (t_max, notes) = resolve_horizon(cfg, &potential)?;
    report.notes.extend(notes);
    report.horizon = Some(t_max);
    report.notes.push(
        "coupled runs use dt ∝ h² so the cross-term oscillations are resolved; \
         at the policy step their stage-quadrature noise exceeds the gap being \
         measured (see the decisions ledger)"
            .into(),
    );

    for &h in &cfg.h_list {
        let start = Instant::now();
        let grid = LatticeGrid::with_period(h, cfg.box_length)?;
        let d = data_for(cfg, &grid)?;
        let init = split_initial_data(&d.r0, &d.r1)?;
        let dt = dt_resolved(h, cfg.dt_factor);
        // the channel difference oscillates at the cross-term frequencies,
        // so its maximum needs dense sampling
        let stride = sample_stride(t_max, dt, cfg.samples.max(1025));
        let (coupled, decoupled) = rayon::join(
            || evolve(System::Coupled(&potential), &init, t_max, dt, stride),
            || evolve(System::Decoupled, &init, t_max, dt, stride),
        );
        let (coupled, decoupled) = (coupled?, decoupled?);
        let mut err = 0.0f64;
        for (i, &t) in coupled.times.iter().enumerate() {
            debug_assert_eq!(t, decoupled.times[i]);
            let dp = coupled.states[i].u_plus.sub(&decoupled.states[i].u_plus)?.l2_norm();
            let dm = coupled.states[i].u_minus.sub(&decoupled.states[i].u_minus)?.l2_norm();
            let e = dp.max(dm);
            err = err.max(e);
            series.push(SeriesRow {
                experiment: cfg.experiment.name().into(),
                h,
                t,
                quantity: "channel_difference".into(),
                value: e,
            });
        }
        let mut norms = BTreeMap::new();
        norms.insert("data_pair_hs".into(), pair_norm(&d.r0, &d.q, cfg.s)?);
        report.points.push(SweepPoint {
            h,
            error: err,
            norms,
            wrap_diag: seam_mass_fraction(&d.r0, 1.0 / 16.0),
            excluded: None,
        });
        timing.wall_s.insert(format!("h={h}"), start.elapsed().as_secs_f64());
    }
    apply_error_floor(&mut report.points, |h| dt_resolved(h, cfg.dt_factor));
    fit_sweep(&mut report);
    if let Some(fit) = &report.fit {
        report.checks.push(CheckLine::ge("decoupling_slope", fit.slope, 0.85));
        report.checks.push(CheckLine::le("decoupling_residual", fit.residual, 0.1));
    }
    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

pub fn run_linear_comparison(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let t_max = match cfg.horizon {
        Horizon::Fixed(t) => t,
        Horizon::Auto => 1.0,
    };
    report.horizon = Some(t_max);

    for &h in &cfg.h_list {
        let start = Instant::now();
        let grid = LatticeGrid::with_period(h, cfg.box_length)?;
        let f = profile_field(&grid, cfg.s, cfg.r_bound, cfg.seed, true)?;
        let hs = sobolev_norm(&f, cfg.s, false)?;
        let count = cfg.samples.max(65) | 1;
        let times: Vec<f64> = (0..count)
            .map(|i| -t_max + 2.0 * t_max * i as f64 / (count - 1) as f64)
            .collect();
        let lf0 = interpolate(&f, cfg.rho)?;
        let fine_spec = crate::grid::dft_forward(&lf0.field);
        let mut u = Vec::with_capacity(count);
        let mut ux = Vec::with_capacity(count);
        for &t in &times {
            // lattice flow, interpolated
            let lat = apply_fpu_flow(&f, t, Sign::Plus);
            let pl = interpolate(&lat, cfg.rho)?;
            let pl_dx = interpolant_derivative(&lat, cfg.rho)?;
            // Airy flow of the interpolated data on the fine grid
            let airy = LineField::from_field(
                crate::grid::dft_inverse(&airy_flow_spec(&fine_spec, t, Sign::Plus)),
                cfg.rho,
            );
            let airy_dx = airy.spectral_derivative();
            u.push(pl.sub(&airy)?);
            ux.push(pl_dx.sub(&airy_dx)?);
        }
        let err = mixed_norm_s(&times, &u, &ux)? / hs;
        let ct_part = u.iter().map(|f| f.l2_norm()).fold(0.0f64, f64::max) / hs;
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t: t_max,
            quantity: "s_norm_error".into(),
            value: err,
        });
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t: t_max,
            quantity: "ct_l2_error".into(),
            value: ct_part,
        });
        let mut norms = BTreeMap::new();
        norms.insert("data_hs".into(), hs);
        norms.insert("ct_l2_error".into(), ct_part);
        report.points.push(SweepPoint {
            h,
            error: err,
            norms,
            wrap_diag: 0.0,
            excluded: None,
        });
        timing.wall_s.insert(format!("h={h}"), start.elapsed().as_secs_f64());
    }
    fit_sweep(&mut report);
    if let Some(fit) = &report.fit {
        report.checks.push(CheckLine::ge("linear_comparison_slope", fit.slope, 0.36));
    }
    // the sup-in-t L² component alone tracks the flow-approximation rate;
    // the smoothing component of the S-norm carries the periodic-recurrence
    // floor ~ sqrt(4T/L)·‖∂_x P_hi f‖ discussed in the module notes
    let ct_points: Vec<RatePoint> = report
        .points
        .iter()
        .map(|p| RatePoint { h: p.h, error: p.norms["ct_l2_error"] })
        .collect();
    if let Ok(fit) = fit_rate(&ct_points) {
        report.constants.insert("ct_component_slope".into(), fit.slope);
    }
    report.notes.push(
        "the L∞_x L²_t smoothing component of the S-norm is bounded below on a \
         periodic box by the recurrence floor sqrt(4T/L)·‖∂_x P_hi f‖, which is \
         O(1) for H¹-critical data; see the decisions ledger"
            .into(),
    );
    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

pub fn run_conservation(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let h = cfg.h_list[0];
    let grid = LatticeGrid::with_period(h, cfg.box_length)?;
    let t_max = match cfg.horizon {
        Horizon::Fixed(t) => t,
        Horizon::Auto => 1.0,
    };
    report.horizon = Some(t_max);

    // coupled-FPU Hamiltonian drift on smooth data, cubic and Toda
    for (name, potential) in [
        ("cubic", Potential::cubic_normalized()),
        ("toda", Potential::Toda { alpha: 1.0, beta: 1.0 }),
    ] {
        let start = Instant::now();
        let r0 = smooth_data(&grid, 6, 0.5, cfg.seed.wrapping_add(1));
        let r1 = smooth_data(&grid, 6, 0.5, cfg.seed.wrapping_add(2));
        let init = split_initial_data(&r0, &r1)?;
        let dt = dt_policy(h, cfg.dt_factor) / 8.0;
        let stride = sample_stride(t_max, dt, cfg.samples);
        let traj = evolve(System::Coupled(&potential), &init, t_max, dt, stride)?;
        let e0 = hamiltonian(&reconstruct_state(&traj.states[traj.times.iter().position(|&t| t == 0.0).unwrap()]), &potential)?;
        let mut drift = 0.0f64;
        for (i, &t) in traj.times.iter().enumerate() {
            let e = hamiltonian(&reconstruct_state(&traj.states[i]), &potential)?;
            drift = drift.max(((e - e0) / e0).abs());
            series.push(SeriesRow {
                experiment: cfg.experiment.name().into(),
                h,
                t,
                quantity: format!("hamiltonian_{name}"),
                value: e,
            });
        }
        report.constants.insert(format!("hamiltonian_drift_{name}"), drift);
        report.checks.push(CheckLine::le(format!("hamiltonian_drift_{name}"), drift, 1e-8));
        timing.wall_s.insert(format!("hamiltonian_{name}"), start.elapsed().as_secs_f64());
    }

    // KdV momentum drift per unit time on smooth data
    let start = Instant::now();
    let kdv_grid = LatticeGrid::with_period(cfg.box_length / 1024.0, cfg.box_length)?;
    let w0 = smooth_data(&kdv_grid, 6, 1.0, cfg.seed.wrapping_add(3));
    let dt = (1.0f64 / 1024.0).min(kdv_dt_cap(&kdv_grid, w0.linf_norm()));
    let stride = sample_stride(t_max, dt, cfg.samples);
    let traj = evolve_kdv(&w0, Sign::Plus, t_max, dt, stride)?;
    let p0 = w0.l2_norm().powi(2);
    let mut rate = 0.0f64;
    for (i, &t) in traj.times.iter().enumerate() {
        let p = traj.fields[i].l2_norm().powi(2);
        if t != 0.0 {
            rate = rate.max(((p - p0) / p0 / t).abs());
        }
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h: kdv_grid.spacing(),
            t,
            quantity: "kdv_momentum".into(),
            value: p,
        });
    }
    report.constants.insert("kdv_momentum_rate".into(), rate);
    report.checks.push(CheckLine::le("kdv_momentum_rate", rate, 1e-10));
    timing.wall_s.insert("kdv_momentum".into(), start.elapsed().as_secs_f64());

    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

pub fn run_kernels(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let start = Instant::now();
    let mut series = Vec::new();

    let n_levels = [1.0, 0.5, 0.25, 0.125];
    let t_values = [0.01, 0.1, 0.5, 1.0];
    let x_count = 16;
    let mut queries: Vec<KernelQuery> = Vec::new();
    for &h in &cfg.h_list {
        for &nd in &n_levels {
            let x_lo = 0.1 * h / nd;
            let x_hi = 3.0 * (nd * nd / (h * h)).max(4.0 * h / nd);
            for k in 0..x_count {
                let x = x_lo * (x_hi / x_lo).powf(k as f64 / (x_count - 1) as f64);
                for &t in &t_values {
                    queries.push(KernelQuery::new(t, x, nd, h, Sign::Plus));
                }
                queries.push(KernelQuery::new(0.0, x, nd, h, Sign::Plus));
            }
        }
    }
    report.constants.insert("query_count".into(), queries.len() as f64);

    let evaluate = |refine: u32| -> Result<Vec<(f64, f64, f64)>> {
        queries
            .par_iter()
            .map(|q| {
                let v = kernel_eval(&q.refined(refine))?.norm();
                let disp = if q.t != 0.0 { v / dispersive_bound(q) } else { 0.0 };
                let (_, bound) = piecewise_bound(q);
                let piece = if q.t.abs() <= 1.0 { v / bound } else { 0.0 };
                Ok((v, disp, piece))
            })
            .collect()
    };
    let base = evaluate(0)?;
    let fine = evaluate(1)?;

    let mut c_disp = (0.0f64, 0);
    let mut c_piece = (0.0f64, 0);
    let mut c_t0 = (0.0f64, 0);
    for (i, &(v, disp, piece)) in base.iter().enumerate() {
        let q = &queries[i];
        if disp > c_disp.0 {
            c_disp = (disp, i);
        }
        if piece > c_piece.0 {
            c_piece = (piece, i);
        }
        if q.t == 0.0 && q.x.abs() >= q.h / q.n_dyadic {
            let r = v * q.x.abs();
            if r > c_t0.0 {
                c_t0 = (r, i);
            }
        }
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h: q.h,
            t: q.t,
            quantity: format!("abs_kernel_N={}_x={}", q.n_dyadic, q.x),
            value: v,
        });
    }
    let arg = |i: usize| {
        let q = &queries[i];
        serde_json::json!({"t": q.t, "x": q.x, "N": q.n_dyadic, "h": q.h})
    };
    report.constants.insert("dispersive_constant".into(), c_disp.0);
    report.constants.insert("piecewise_constant".into(), c_piece.0);
    report.constants.insert("t0_decay_constant".into(), c_t0.0);
    report.details.insert("dispersive_argmax".into(), arg(c_disp.1));
    report.details.insert("piecewise_argmax".into(), arg(c_piece.1));
    report.details.insert("t0_argmax".into(), arg(c_t0.1));

    // refinement stability of the recorded constants
    let refined_disp = fine.iter().map(|x| x.1).fold(0.0f64, f64::max);
    let refined_piece = fine.iter().map(|x| x.2).fold(0.0f64, f64::max);
    let stab_disp = (refined_disp - c_disp.0).abs() / c_disp.0.max(1e-300);
    let stab_piece = (refined_piece - c_piece.0).abs() / c_piece.0.max(1e-300);
    report.constants.insert("dispersive_stability".into(), stab_disp);
    report.constants.insert("piecewise_stability".into(), stab_piece);
    report.checks.push(CheckLine::le("dispersive_stability", stab_disp, 0.02));
    report.checks.push(CheckLine::le("piecewise_stability", stab_piece, 0.02));
    report.checks.push(CheckLine::le("dispersive_constant_finite", c_disp.0, 1e3));
    report.checks.push(CheckLine::le("piecewise_constant_finite", c_piece.0, 1e3));
    report.checks.push(CheckLine::le("t0_constant_finite", c_t0.0, 1e3));

    timing.wall_s.insert("sweep".into(), start.elapsed().as_secs_f64());
    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

pub fn run_bilinear(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();

    // kind I: uniform constant
    let start = Instant::now();
    let mut sup_i = Vec::new();
    for &h in &cfg.h_list {
        let q = BilinearQuery {
            b: cfg.b,
            delta: cfg.delta,
            xi_samples: cfg.bilinear_samples.0,
            tau_samples: cfg.bilinear_samples.1,
            ..BilinearQuery::new(h)
        };
        let rec = bilinear_sup(&q, BilinearKind::I)?;
        sup_i.push((h, rec));
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t: 0.0,
            quantity: "sup_I".into(),
            value: rec.sup,
        });
    }
    let max_i = sup_i.iter().map(|(_, r)| r.sup).fold(0.0f64, f64::max);
    let min_i = sup_i.iter().map(|(_, r)| r.sup).fold(f64::INFINITY, f64::min);
    report.constants.insert("sup_I_max".into(), max_i);
    report.constants.insert("sup_I_variation".into(), max_i / min_i);
    let best = sup_i.iter().max_by(|a, b| a.1.sup.partial_cmp(&b.1.sup).unwrap()).unwrap();
    report.details.insert(
        "sup_I_argmax".into(),
        serde_json::json!({"h": best.0, "tau": best.1.arg_tau, "xi": best.1.arg_xi}),
    );
    report.checks.push(CheckLine::le("sup_I_uniformity", max_i / min_i, 4.0));
    timing.wall_s.insert("kind_I".into(), start.elapsed().as_secs_f64());

    // quadrature refinement stability at the attained argmax
    let start = Instant::now();
    let stab = {
        let (h, _) = *best;
        let base = BilinearQuery {
            b: cfg.b,
            delta: cfg.delta,
            xi_samples: (cfg.bilinear_samples.0 / 8).max(64),
            tau_samples: cfg.bilinear_samples.1,
            ..BilinearQuery::new(h)
        };
        let coarse = bilinear_sup(&base, BilinearKind::I)?.sup;
        let fine = bilinear_sup(&BilinearQuery { ring_ratio: 1.5, ..base }, BilinearKind::I)?.sup;
        (fine - coarse).abs() / coarse.max(1e-300)
    };
    report.constants.insert("sup_I_quadrature_stability".into(), stab);
    report.checks.push(CheckLine::le("sup_I_quadrature_stability", stab, 0.02));
    timing.wall_s.insert("stability".into(), start.elapsed().as_secs_f64());

    // kinds II and III: h^{s'-s} decay
    for kind in [BilinearKind::II, BilinearKind::III] {
        let kname = if kind == BilinearKind::II { "II" } else { "III" };
        for &gain in &cfg.gains {
            let start = Instant::now();
            let mut pts = Vec::new();
            for &h in &cfg.h_list {
                let q = BilinearQuery {
                    s: 0.0,
                    s_prime: gain,
                    b: cfg.b,
                    delta: cfg.delta,
                    xi_samples: cfg.bilinear_samples.0,
                    tau_samples: cfg.bilinear_samples.1,
                    ..BilinearQuery::new(h)
                };
                let rec = bilinear_sup(&q, kind)?;
                pts.push(RatePoint { h, error: rec.sup });
                series.push(SeriesRow {
                    experiment: cfg.experiment.name().into(),
                    h,
                    t: 0.0,
                    quantity: format!("sup_{kname}_gain={gain}"),
                    value: rec.sup,
                });
            }
            let fit = fit_rate(&pts)?;
            report
                .constants
                .insert(format!("slope_{kname}_gain={gain}"), fit.slope);
            report.checks.push(CheckLine::le(
                format!("slope_dev_{kname}_gain={gain}"),
                (fit.slope - gain).abs(),
                0.05,
            ));
            timing
                .wall_s
                .insert(format!("kind_{kname}_gain={gain}"), start.elapsed().as_secs_f64());
        }
    }

    // closed-form ceilings at 10⁴ sampled ξ per h
    let mut worst_i = 0.0f64;
    let mut worst_ii = 0.0f64;
    for &h in &cfg.h_list {
        for j in 1..=10_000 {
            let xi = std::f64::consts::PI / h * j as f64 / 10_000.0;
            worst_i = worst_i.max(ceiling_i(h, xi) / (4.0 * 2.0f64.sqrt()));
            for &gain in &cfg.gains {
                worst_ii = worst_ii.max(ceiling_ii(h, xi, gain) / (h / 4.0).powf(gain));
            }
        }
    }
    report.constants.insert("ceiling_I_ratio".into(), worst_i);
    report.constants.insert("ceiling_II_ratio".into(), worst_ii);
    report.checks.push(CheckLine::le("ceiling_I", worst_i, 1.0 + 1e-12));
    report.checks.push(CheckLine::le("ceiling_II", worst_ii, 1.01));

    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

pub fn run_xsb_failure(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut report = Report::new(cfg);
    let mut timing = Timing::now();
    let mut series = Vec::new();
    let window = 0.1;
    let b = cfg.b;

    let mut fpu_ratios = Vec::new();
    let mut airy_ratios = Vec::new();
    for &h in &cfg.h_list {
        let start = Instant::now();
        let grid = LatticeGrid::with_period(h, cfg.box_length)?;
        let dt = nyquist_dt(&grid, 1.5).min(window / 16.0);

        // matching discrete phase on class data: uniform in h
        let f = profile_field(&grid, cfg.s, cfg.r_bound, cfg.seed, true)?;
        let (times, fields) = linear_flow_trajectory(&f, Sign::Plus, window, dt)?;
        let p = XsbParams { s: cfg.s, b, sign: Sign::Plus, phase: PhaseKind::Fpu, window };
        let norm = xsb_norm(&times, &fields, &p)?;
        let ratio = norm / sobolev_norm(&f, cfg.s, false)?;
        fpu_ratios.push(ratio);
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t: 0.0,
            quantity: "fpu_phase_ratio".into(),
            value: ratio,
        });

        // Airy phase on interpolated high-frequency data: blow-up
        let g = high_frequency_data(&grid);
        let rho = 4;
        let (times, fields) = linear_flow_trajectory(&g, Sign::Plus, window, dt)?;
        let fine: Vec<LatticeField> = times
            .iter()
            .zip(&fields)
            .map(|(_, f)| interpolate(f, rho).map(|lf| lf.field))
            .collect::<Result<Vec<_>>>()?;
        let p = XsbParams { s: cfg.s, b, sign: Sign::Plus, phase: PhaseKind::Airy, window };
        let norm = xsb_norm(&times, &fine, &p)?;
        let hs = sobolev_norm(&g, cfg.s, false)?;
        let ratio = (norm / hs).powi(2);
        airy_ratios.push(ratio);
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t: 0.0,
            quantity: "airy_phase_squared_ratio".into(),
            value: ratio,
        });
        timing.wall_s.insert(format!("h={h}"), start.elapsed().as_secs_f64());
    }

    let fpu_var = fpu_ratios.iter().fold(0.0f64, |m, &v| m.max(v))
        / fpu_ratios.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    report.constants.insert("fpu_phase_variation".into(), fpu_var);
    report.checks.push(CheckLine::le("fpu_phase_variation", fpu_var, 2.0));

    let growth_floor = 2.0f64.powf(2.0 * b);
    let mut min_growth = f64::INFINITY;
    for w in airy_ratios.windows(2) {
        min_growth = min_growth.min(w[1] / w[0]);
    }
    report.constants.insert("airy_min_growth_factor".into(), min_growth);
    report.checks.push(CheckLine::ge("airy_blowup_growth", min_growth, growth_floor));

    // bilinear regularity gain: bounded ratios on linear-flow pairs
    let start = Instant::now();
    let mut gain_ratios = Vec::new();
    for &h in cfg.h_list.iter().take(3) {
        let grid = LatticeGrid::with_period(h, cfg.box_length)?;
        let dt = nyquist_dt(&grid, 1.5).min(window / 16.0);
        let u0 = profile_field(&grid, cfg.s, cfg.r_bound, cfg.seed.wrapping_add(7), false)?;
        let v0 = profile_field(&grid, cfg.s, cfg.r_bound, cfg.seed.wrapping_add(8), true)?;
        let (times, u) = linear_flow_trajectory(&u0, Sign::Plus, window, dt)?;
        let (_, v) = linear_flow_trajectory(&v0, Sign::Plus, window, dt)?;
        let p = XsbParams { s: cfg.s, b, sign: Sign::Plus, phase: PhaseKind::Fpu, window };
        let ratio = product_gain_check(&times, &u, &v, &p)?;
        gain_ratios.push(ratio);
        series.push(SeriesRow {
            experiment: cfg.experiment.name().into(),
            h,
            t: 0.0,
            quantity: "product_gain_ratio".into(),
            value: ratio,
        });
    }
    let g_max = gain_ratios.iter().fold(0.0f64, |m, &v| m.max(v));
    let g_min = gain_ratios.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    report.constants.insert("product_gain_max".into(), g_max);
    report.checks.push(CheckLine::le("product_gain_uniformity", g_max / g_min, 5.0));
    timing.wall_s.insert("product_gain".into(), start.elapsed().as_secs_f64());

    report.finalize();
    Ok(ExperimentOutput { report, series, timing })
}

/// Runs a list of experiments, isolating failures; returns outputs paired
/// with the bundle entries.
pub fn run_suite(
    configs: &[ExperimentConfig],
) -> (Vec<(ExperimentConfig, Result<ExperimentOutput>)>, bool) {
    let mut outputs = Vec::new();
    let mut partial = false;
    for cfg in configs {
        let out = run(cfg);
        if out.is_err() {
            partial = true;
        }
        outputs.push((cfg.clone(), out));
    }
    (outputs, partial)
}
