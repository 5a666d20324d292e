//! Sampled suprema of the reduced bilinear integrands.
//!
//! After the sum-to-product substitution the inner ξ₁-integral becomes
//! (2/h)∫ dφ/⟨c + A·cos φ⟩^{2b} over a π-length window, with c the offset
//! τ ∓ ξ/h² and A of size 4/h³. The integrand is a smooth ridge whose width
//! in φ can be as small as 1/A, so panels are graded geometrically around
//! the analytically located resonance roots. Suprema are sampled on a
//! (τ, ξ) lattice, with the τ sweep ordered outward from the prefactor peak
//! and pruned by a rigorous upper bound once the running supremum exceeds
//! what a sample could contribute.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::verifiers::quadrature::GL8;

#[derive(Clone, Copy, Debug)]
pub struct BilinearQuery {
    pub h: f64,
    pub s: f64,
    pub s_prime: f64,
    /// temporal weight exponent, 1/2 < b < 3/4 - δ
    pub b: f64,
    /// spare exponent, b - 1/2 < δ < 1/4
    pub delta: f64,
    pub xi_samples: usize,
    pub tau_samples: usize,
    /// geometric grading ratio for the resonance rings (quadrature control)
    pub ring_ratio: f64,
}

impl BilinearQuery {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            s: 0.0,
            s_prime: 0.5,
            b: 0.55,
            delta: 0.1,
            xi_samples: 1 << 12,
            tau_samples: 1 << 12,
            ring_ratio: 2.5,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.b > 0.5 && self.delta > 0.0 && self.delta < 0.25 && self.b < 0.75 - self.delta) {
            return Err(Error::InvalidConfig(format!(
                "(b, δ) = ({}, {}) outside the window 1/2 < b < 3/4 - δ, 0 < δ < 1/4",
                self.b, self.delta
            )));
        }
        if !(self.s_prime >= self.s && self.s_prime <= self.s + 1.0) {
            return Err(Error::InvalidConfig("need s ≤ s' ≤ s + 1".into()));
        }
        if self.xi_samples < 64 || self.tau_samples < 64 {
            return Err(Error::UnderResolved(
                "bilinear sup needs at least 64 samples per axis".into(),
            ));
        }
        if !(self.ring_ratio > 1.2 && self.ring_ratio <= 4.0) {
            return Err(Error::UnderResolved("ring grading ratio outside (1.2, 4]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BilinearKind {
    /// same-channel product, bounded by an absolute constant
    I,
    /// opposite-channel product of two translated factors, O(h^{s'-s})
    II,
    /// mixed product with one translated factor, O(h^{s'-s})
    III,
}

#[derive(Clone, Copy, Debug)]
pub struct BilinearRecord {
    pub sup: f64,
    pub arg_tau: f64,
    pub arg_xi: f64,
}

/// ∫_{lo}^{lo+π} (1 + (c + A cos φ)²)^{-b} dφ with graded panels around the
/// resonance roots.
fn resonance_integral(lo: f64, amp: f64, c: f64, b: f64, ratio: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let hi = lo + pi;
    let mu = |phi: f64| c + amp * phi.cos();
    let weight = |phi: f64| {
        let m = mu(phi);
        (1.0 + m * m).powf(-b)
    };

    // critical points: resonance roots cos φ* = -c/A, else the cosine
    // extrema where |μ| is locally smallest
    let mut crit: Vec<f64> = Vec::new();
    let a = amp.abs();
    if a > 0.0 && c.abs() <= a {
        let base = (-c / amp).clamp(-1.0, 1.0).acos();
        for cand in [base, -base] {
            for k in -2..=2 {
                let p = cand + 2.0 * pi * k as f64;
                if p > lo && p < hi {
                    crit.push(p);
                }
            }
        }
    } else {
        for k in -2..=2 {
            let p = pi * k as f64;
            if p > lo && p < hi && mu(p).abs() < 32.0 {
                crit.push(p);
            }
        }
    }
    crit.sort_by(|x, y| x.partial_cmp(y).unwrap());
    crit.dedup_by(|x, y| (*x - *y).abs() < 1e-12);

    // panel edges: uniform base + geometric rings around each critical point
    let mut cuts: Vec<f64> = (0..=8).map(|i| lo + pi * i as f64 / 8.0).collect();
    for &p in &crit {
        let g1 = (amp * p.sin()).abs();
        let g2 = 0.5 * (amp * p.cos()).abs();
        let scale = mu(p).abs().max(1.0);
        let mut w0 = (scale / g1.max(1e-300)).min((scale / g2.max(1e-300)).sqrt());
        w0 = w0.clamp(1e-9 * pi, pi / 8.0);
        let mut r = w0;
        while r < pi {
            for e in [p - r, p + r] {
                if e > lo && e < hi {
                    cuts.push(e);
                }
            }
            r *= ratio;
        }
        cuts.push(p.clamp(lo, hi));
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (pa, pb) = (w[0], w[1]);
        let cmid = 0.5 * (pa + pb);
        let rad = 0.5 * (pb - pa);
        let mut acc = 0.0;
        for &(xn, wn) in GL8.iter() {
            acc += wn * weight(cmid + rad * xn);
        }
        total += acc * rad;
    }
    total
}

/// Sampled supremum of the reduced bilinear bound for one kind and spacing.
pub fn bilinear_sup(q: &BilinearQuery, kind: BilinearKind) -> Result<BilinearRecord> {
    q.validate()?;
    let h = q.h;
    let pi = std::f64::consts::PI;
    let exp_pref = 2.0 * (1.0 - q.b - q.delta);
    let p_gain = q.s_prime - q.s;
    let phase_scale = 4.0 / (h * h * h);
    let c_span = 2.0 * phase_scale;

    let per_xi = |i: usize| -> BilinearRecord {
        let xi = pi / h * (i + 1) as f64 / q.xi_samples as f64;
        // prefactor pieces that do not depend on τ
        let sin_half = (0.5 * h * xi).sin();
        let grad2 = 4.0 / (h * h) * sin_half * sin_half;
        let gain = match kind {
            BilinearKind::I => 1.0,
            _ => (1.0 + xi * xi).powf(0.5 * p_gain),
        };
        // resonance geometry
        let (amp, lo) = match kind {
            BilinearKind::I | BilinearKind::II => (phase_scale * (0.25 * h * xi).sin(), 0.25 * h * xi - 0.5 * pi),
            BilinearKind::III => (phase_scale * (0.25 * h * xi).cos(), 0.25 * h * xi - pi),
        };
        // prefactor peak in the offset variable c = τ ∓ ξ/h²
        let c_peak = match kind {
            BilinearKind::I => -2.0 / (h * h * h) * (0.5 * h * xi).sin(),
            _ => 2.0 / (h * h * h) * (0.5 * h * xi).sin(),
        };
        let mut best = BilinearRecord { sup: 0.0, arg_tau: 0.0, arg_xi: xi };
        let m = q.tau_samples;
        // sweep c outward from the prefactor peak so the prune bound bites
        for k in 0..m {
            let half = (k + 1) / 2;
            let side = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = c_peak + side * c_span * half as f64 / (m / 2) as f64;
            let pref = grad2 / ((1.0 + (c - c_peak) * (c - c_peak)).powf(0.5 * exp_pref) * gain);
            // prune: the φ-integral is at most π·(1+μ_min²)^{-b}
            let mu_min = (c.abs() - amp.abs()).max(0.0);
            let cap = pref * (2.0 / h) * pi * (1.0 + mu_min * mu_min).powf(-q.b);
            if cap <= best.sup {
                continue;
            }
            let integral = (2.0 / h) * resonance_integral(lo, amp, c, q.b, q.ring_ratio);
            let val = pref * integral;
            if val > best.sup {
                let tau = match kind {
                    BilinearKind::I => c + xi / (h * h),
                    _ => c - xi / (h * h),
                };
                best = BilinearRecord { sup: val, arg_tau: tau, arg_xi: xi };
            }
        }
        best
    };

    let records: Vec<BilinearRecord> = (0..q.xi_samples).into_par_iter().map(per_xi).collect();
    let mut best = BilinearRecord { sup: 0.0, arg_tau: 0.0, arg_xi: 0.0 };
    for r in records {
        if r.sup > best.sup {
            best = r;
        }
    }
    Ok(best)
}

/// Closed-form ceiling of the kind-I chain: 4√2·cos(hξ/8)·cos²(hξ/4).
pub fn ceiling_i(h: f64, xi: f64) -> f64 {
    4.0 * 2.0f64.sqrt() * (0.125 * h * xi).cos() * (0.25 * h * xi).cos().powi(2)
}

/// Closed-form ceiling of the kind-II chain: sin(h|ξ|/4)/⟨ξ⟩^{s'-s}.
pub fn ceiling_ii(h: f64, xi: f64, gain: f64) -> f64 {
    (0.25 * h * xi.abs()).sin() / (1.0 + xi * xi).powf(0.5 * gain)
}
