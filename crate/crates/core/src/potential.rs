//! Interaction potentials for the oscillator chain.
//!
//! Every admissible potential satisfies V(0) = V'(0) = 0, a := V''(0) > 0 and
//! b := V'''(0) ≠ 0. `normalize` rescales to a = b = 1 together with the
//! record needed to map solutions back. `nonlinearity_defect` evaluates
//! V'(ρ) - aρ - bρ²/2 without cancellation; the coupled solver feeds it
//! arguments of size h²·r̃ where the naive difference would lose most digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TODA_EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// V(r) = a r²/2 + b r³/6
    Cubic { a: f64, b: f64 },
    /// V(r) = Σ_{k≥2} c_k r^k / k!, coefficients listed from c₂.
    Polynomial { coeffs: Vec<f64> },
    /// V(r) = e[(1 + r/d)^{-12} - 2(1 + r/d)^{-6} + 1], defined for r > -d.
    LennardJones { e: f64, d: f64 },
    /// V(r) = α(e^{βr} - βr - 1)
    Toda { alpha: f64, beta: f64 },
    /// V(r) = energy · base(amplitude · r); produced by `normalize`.
    Rescaled { base: Box<Potential>, amplitude: f64, energy: f64 },
}

/// Maps a normalized solution back to the original one:
/// r̃(t, x) = amplitude · s̃(time · t, x).
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScalingRecord {
    /// a/b
    pub amplitude: f64,
    /// √a
    pub time: f64,
}

impl Potential {
    pub fn cubic_normalized() -> Self {
        Potential::Cubic { a: 1.0, b: 1.0 }
    }

    /// a = V''(0)
    pub fn stiffness(&self) -> f64 {
        match self {
            Potential::Cubic { a, .. } => *a,
            Potential::Polynomial { coeffs } => coeffs.first().copied().unwrap_or(0.0),
            Potential::LennardJones { e, d } => 72.0 * e / (d * d),
            Potential::Toda { alpha, beta } => alpha * beta * beta,
            Potential::Rescaled { base, amplitude, energy } => {
                energy * amplitude * amplitude * base.stiffness()
            }
        }
    }

    /// b = V'''(0)
    pub fn asymmetry(&self) -> f64 {
        match self {
            Potential::Cubic { b, .. } => *b,
            Potential::Polynomial { coeffs } => coeffs.get(1).copied().unwrap_or(0.0),
            Potential::LennardJones { e, d } => -1512.0 * e / (d * d * d),
            Potential::Toda { alpha, beta } => alpha * beta * beta * beta,
            Potential::Rescaled { base, amplitude, energy } => {
                energy * amplitude * amplitude * amplitude * base.asymmetry()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.stiffness();
        let b = self.asymmetry();
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("V''(0) = {a} must be positive")));
        }
        if b == 0.0 || !b.is_finite() {
            return Err(Error::Domain("V'''(0) must be nonzero".into()));
        }
        Ok(())
    }

    pub fn is_normalized(&self) -> bool {
        (self.stiffness() - 1.0).abs() <= 1e-12 && (self.asymmetry() - 1.0).abs() <= 1e-12
    }

    /// True when r lies in the range the potential is defined and finite on.
    pub fn admissible(&self, r: f64) -> bool {
        if !r.is_finite() {
            return false;
        }
        match self {
            Potential::Cubic { .. } | Potential::Polynomial { .. } => true,
            Potential::LennardJones { d, .. } => 1.0 + r / d > 1e-6,
            Potential::Toda { beta, .. } => (beta * r).abs() < TODA_EXP_LIMIT,
            Potential::Rescaled { base, amplitude, .. } => base.admissible(amplitude * r),
        }
    }

    fn check_admissible(&self, r: f64) -> Result<()> {
        if self.admissible(r) {
            Ok(())
        } else {
            Err(Error::Domain(format!("argument r = {r} outside the admissible range")))
        }
    }

    /// Derivative of the requested order (0..=4) at r.
    pub fn eval(&self, order: usize, r: f64) -> Result<f64> {
        if order > 4 {
            return Err(Error::InvalidConfig(format!("derivative order {order} not supported (max 4)")));
        }
        self.check_admissible(r)?;
        Ok(self.eval_unchecked(order, r))
    }

    fn eval_unchecked(&self, order: usize, r: f64) -> f64 {
        match self {
            Potential::Cubic { a, b } => match order {
                0 => a * r * r / 2.0 + b * r * r * r / 6.0,
                1 => a * r + b * r * r / 2.0,
                2 => a + b * r,
                3 => *b,
                _ => 0.0,
            },
            Potential::Polynomial { coeffs } => {
                // V^{(m)}(r) = Σ_{k≥max(2,m)} c_k r^{k-m}/(k-m)!
                let mut sum = 0.0;
                let mut term_pow = 1.0; // r^{k-m} built up iteratively
                let mut fact = 1.0;
                let mut idx = 0;
                for (i, &c) in coeffs.iter().enumerate() {
                    let k = i + 2;
                    if k < order {
                        continue;
                    }
                    let p = k - order;
                    while idx < p {
                        idx += 1;
                        term_pow *= r;
                        fact *= idx as f64;
                    }
                    sum += c * term_pow / fact;
                }
                sum
            }
            Potential::LennardJones { e, d } => {
                let u = 1.0 + r / d;
                // f_n = (1+r/d)^{-n}: f_n^{(k)} = (-1)^k n(n+1)...(n+k-1)/d^k u^{-n-k}
                let rising = |n: u32, k: u32| -> f64 {
                    (0..k).map(|j| (n + j) as f64).product()
                };
                let k = order as u32;
                let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                let dk = d.powi(order as i32);
                if order == 0 {
                    e * (u.powi(-12) - 2.0 * u.powi(-6) + 1.0)
                } else {
                    e * sgn / dk
                        * (rising(12, k) * u.powi(-(12 + order as i32))
                            - 2.0 * rising(6, k) * u.powi(-(6 + order as i32)))
                }
            }
            Potential::Toda { alpha, beta } => {
                let ex = (beta * r).exp();
                match order {
                    0 => alpha * (ex - beta * r - 1.0),
                    1 => alpha * beta * (beta * r).exp_m1(),
                    k => alpha * beta.powi(k as i32) * ex,
                }
            }
            Potential::Rescaled { base, amplitude, energy } => {
                energy * amplitude.powi(order as i32) * base.eval_unchecked(order, amplitude * r)
            }
        }
    }

    /// Rescale to a = b = 1. Returns the normalized potential and the record
    /// mapping normalized solutions back via r̃(t,x) = (a/b)·s̃(√a·t, x).
    pub fn normalize(&self) -> Result<(Potential, ScalingRecord)> {
        self.validate()?;
        let a = self.stiffness();
        let b = self.asymmetry();
        let record = ScalingRecord { amplitude: a / b, time: a.sqrt() };
        if self.is_normalized() {
            return Ok((self.clone(), record));
        }
        let normalized = match self {
            Potential::Cubic { .. } => Potential::Cubic { a: 1.0, b: 1.0 },
            Potential::Toda { .. } => Potential::Toda { alpha: 1.0, beta: 1.0 },
            other => Potential::Rescaled {
                base: Box::new(other.clone()),
                amplitude: a / b,
                energy: b * b / (a * a * a),
            },
        };
        debug_assert!((normalized.stiffness() - 1.0).abs() < 1e-10);
        debug_assert!((normalized.asymmetry() - 1.0).abs() < 1e-10);
        Ok((normalized, record))
    }

    /// V'(ρ) - aρ - bρ²/2, evaluated without cancellation for small ρ.
    pub fn nonlinearity_defect(&self, rho: f64) -> Result<f64> {
        self.check_admissible(rho)?;
        Ok(self.defect_unchecked(rho))
    }

    fn defect_unchecked(&self, rho: f64) -> f64 {
        match self {
            Potential::Cubic { .. } => 0.0,
            Potential::Polynomial { coeffs } => {
                // exact tail Σ_{k≥4} c_k ρ^{k-1}/(k-1)!
                let mut sum = 0.0;
                let mut pow = rho * rho * rho; // ρ^{k-1} starting at k = 4
                let mut fact = 6.0; // (k-1)! starting at 3!
                for (i, &c) in coeffs.iter().enumerate() {
                    let k = i + 2;
                    if k < 4 {
                        continue;
                    }
                    sum += c * pow / fact;
                    pow *= rho;
                    fact *= k as f64;
                }
                sum
            }
            Potential::Toda { alpha, beta } => {
                let u = beta * rho;
                // e^u - 1 - u - u²/2 = Σ_{k≥3} u^k/k!
                let tail = if u.abs() < 0.5 {
                    let mut term = u * u * u / 6.0;
                    let mut sum = term;
                    for k in 4..22 {
                        term *= u / k as f64;
                        sum += term;
                        if term.abs() < 1e-18 * sum.abs() {
                            break;
                        }
                    }
                    sum
                } else {
                    u.exp_m1() - u - u * u / 2.0
                };
                alpha * beta * tail
            }
            Potential::LennardJones { e, d } => {
                let u = rho / d;
                if u.abs() < 0.125 {
                    // V'(ρ) = (12e/d) Σ_k (-1)^k (C(k+6,6) - C(k+12,12)) u^k;
                    // the k = 0..2 terms are exactly 0, aρ, bρ²/2.
                    let binom = |n: u64, k: u64| -> f64 {
                        let mut v = 1.0;
                        for j in 0..k {
                            v = v * (n - j) as f64 / (j + 1) as f64;
                        }
                        v
                    };
                    let mut sum = 0.0;
                    let mut pow = u * u * u;
                    for k in 3u64..=16 {
                        let c = binom(k + 6, 6) - binom(k + 12, 12);
                        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sum += sgn * c * pow;
                        pow *= u;
                    }
                    12.0 * e / d * sum
                } else {
                    self.eval_unchecked(1, rho)
                        - self.stiffness() * rho
                        - self.asymmetry() * rho * rho / 2.0
                }
            }
            Potential::Rescaled { base, amplitude, energy } => {
                // defect_W(ρ) = energy·amplitude·defect_base(amplitude·ρ):
                // the linear and quadratic pieces map onto each other exactly
                // because energy·amp²·a_base = a and energy·amp³·b_base = b.
                energy * amplitude * base.defect_unchecked(amplitude * rho)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn finite_diff(p: &Potential, order: usize, r: f64, step: f64) -> f64 {
        // central differences of the analytic first derivative; V itself is
        // cancellation-prone near 0 for the exponential potentials
        match order {
            1 => p.eval(1, r).unwrap(),
            k => {
                (finite_diff(p, k - 1, r + step, step) - finite_diff(p, k - 1, r - step, step))
                    / (2.0 * step)
            }
        }
    }

    #[test]
    fn cubic_standard_values() {
        let p = Potential::Cubic { a: 1.0, b: 1.0 };
        assert_relative_eq!(p.eval(1, 1.0).unwrap(), 1.5, max_relative = 1e-15);
        assert_eq!(p.eval(0, 0.0).unwrap(), 0.0);
        assert_eq!(p.eval(1, 0.0).unwrap(), 0.0);
        assert_eq!(p.eval(4, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn toda_normalization_constants() {
        for &(alpha, beta) in &[(1.0, 1.0), (2.0, 0.5), (0.7, -1.3)] {
            let p = Potential::Toda { alpha, beta };
            assert_relative_eq!(p.stiffness(), alpha * beta * beta, max_relative = 1e-12);
            assert_relative_eq!(p.asymmetry(), alpha * beta * beta * beta, max_relative = 1e-12);
            // finite-difference oracle at 0 with step 1e-5
            let fd2 = finite_diff(&p, 2, 0.0, 1e-5);
            assert_relative_eq!(p.stiffness(), fd2, max_relative = 1e-6);
            let fd3 = finite_diff(&p, 3, 0.0, 1e-5);
            assert_relative_eq!(p.asymmetry(), fd3, max_relative = 1e-6);
        }
    }

    #[test]
    fn lennard_jones_is_critical_at_zero() {
        let p = Potential::LennardJones { e: 1.3, d: 0.9 };
        assert_eq!(p.eval(1, 0.0).unwrap(), 0.0);
        assert_eq!(p.eval(0, 0.0).unwrap(), 0.0);
        assert!(p.stiffness() > 0.0);
        assert!(p.asymmetry() < 0.0);
        let fd2 = finite_diff(&p, 2, 0.0, 1e-5);
        assert_relative_eq!(p.stiffness(), fd2, max_relative = 1e-6);
        // fourth derivative against the closed form 26712 e / d⁴
        assert_relative_eq!(p.eval(4, 0.0).unwrap(), 26712.0 * 1.3 / 0.9f64.powi(4), max_relative = 1e-12);
    }

    #[test]
    fn lennard_jones_domain_guard() {
        let p = Potential::LennardJones { e: 1.0, d: 1.0 };
        assert!(p.eval(0, -1.0).is_err());
        assert!(p.eval(0, -0.5).is_ok());
    }

    #[test]
    fn normalize_cubic() {
        let p = Potential::Cubic { a: 1.0, b: 1.0 };
        let (q, rec) = p.normalize().unwrap();
        assert_eq!(q, p);
        assert_eq!(rec, ScalingRecord { amplitude: 1.0, time: 1.0 });

        let p = Potential::Cubic { a: 4.0, b: 2.0 };
        let (q, rec) = p.normalize().unwrap();
        assert_eq!(rec.time, 2.0);
        assert_eq!(rec.amplitude, 2.0);
        assert!(q.is_normalized());
    }

    #[test]
    fn normalize_toda_identity() {
        let (q, rec) = Potential::Toda { alpha: 1.0, beta: 1.0 }.normalize().unwrap();
        assert_eq!(q, Potential::Toda { alpha: 1.0, beta: 1.0 });
        assert_eq!(rec, ScalingRecord { amplitude: 1.0, time: 1.0 });
    }

    #[test]
    fn normalize_general_round_trip() {
        for p in [
            Potential::LennardJones { e: 0.8, d: 1.1 },
            Potential::Toda { alpha: 2.0, beta: -0.7 },
            Potential::Polynomial { coeffs: vec![3.0, 1.5, 0.25] },
        ] {
            let (q, _rec) = p.normalize().unwrap();
            assert!(q.is_normalized(), "{q:?}");
            // derivative values of the normalized potential round-trip:
            // W^{(k)}(ρ) = energy·amp^k·V^{(k)}(amp ρ)
            for order in 0..=4 {
                let w = q.eval(order, 0.05).unwrap();
                assert!(w.is_finite());
            }
        }
    }

    #[test]
    fn normalize_rejects_degenerate() {
        assert!(Potential::Cubic { a: 1.0, b: 0.0 }.normalize().is_err());
        assert!(Potential::Cubic { a: -1.0, b: 1.0 }.normalize().is_err());
    }

    #[test]
    fn defect_vanishes_for_cubic() {
        let p = Potential::Cubic { a: 1.0, b: 1.0 };
        for r in [-0.5, 1e-8, 0.3] {
            assert_eq!(p.nonlinearity_defect(r).unwrap(), 0.0);
        }
    }

    #[test]
    fn defect_matches_quartic_taylor() {
        // c₄ ≠ 0: defect = c₄ ρ³/3! exactly
        let c4 = 0.7;
        let p = Potential::Polynomial { coeffs: vec![1.0, 1.0, c4] };
        for rho in [1e-6, 1e-3, 0.2] {
            let expect = c4 * rho * rho * rho / 6.0;
            assert_relative_eq!(p.nonlinearity_defect(rho).unwrap(), expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn defect_stable_for_tiny_arguments() {
        // Toda at ρ = 1e-5: naive evaluation keeps ~6 digits, the series all 16.
        let p = Potential::Toda { alpha: 1.0, beta: 1.0 };
        let rho = 1e-5f64;
        let exact = rho.powi(3) / 6.0 * (1.0 + rho / 4.0 + rho * rho / 20.0);
        assert_relative_eq!(p.nonlinearity_defect(rho).unwrap(), exact, max_relative = 1e-12);

        let lj = Potential::LennardJones { e: 1.0, d: 1.0 };
        let sd = lj.nonlinearity_defect(rho).unwrap();
        // leading term (V⁗(0)/2)ρ³/3 = 26712/6 ρ³
        assert_relative_eq!(sd, 26712.0 / 6.0 * rho.powi(3), max_relative = 1e-3);
    }

    #[test]
    fn toda_amplitude_guard() {
        let p = Potential::Toda { alpha: 1.0, beta: 1.0 };
        assert!(p.eval(0, 800.0).is_err());
        assert!(p.eval(0, 100.0).is_ok());
    }
}
