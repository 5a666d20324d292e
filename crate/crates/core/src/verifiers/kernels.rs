//! Dyadic kernels of the linear FPU propagator as oscillatory integrals,
//! K_N^±(t, x) = (1/2π) ∫ e^{i(±t·s_h(ξ) + xξ)} ψ_N(ξ) dξ,
//! evaluated by phase-resolved Gauss–Legendre panels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lp::psi;
use crate::propagators::{PhaseSymbol, Sign};
use crate::verifiers::quadrature::GL16;

#[derive(Clone, Copy, Debug)]
pub struct KernelQuery {
    pub t: f64,
    pub x: f64,
    /// dyadic band N ≤ 1
    pub n_dyadic: f64,
    pub h: f64,
    pub sign: Sign,
    /// extra panel-halving levels on top of the quarter-period rule
    pub refine: u32,
    /// hard cap on the panel count; exceeding it rejects the query
    pub max_panels: usize,
}

impl KernelQuery {
    pub fn new(t: f64, x: f64, n_dyadic: f64, h: f64, sign: Sign) -> Self {
        Self { t, x, n_dyadic, h, sign, refine: 0, max_panels: 1 << 22 }
    }

    pub fn refined(mut self, levels: u32) -> Self {
        self.refine = levels;
        self
    }
}

/// High-accuracy value of K_N^±(t, x).
///
/// Panels are sized to at most a quarter period of the instantaneous phase
/// (64 Gauss points per period, comfortably above the 20-point floor) and to
/// at least 16 panels across the band; queries whose oscillation count would
/// exceed the panel cap are rejected.
pub fn kernel_eval(q: &KernelQuery) -> Result<Complex64> {
    if !(q.n_dyadic > 0.0) || q.n_dyadic > 1.0 {
        return Err(Error::InvalidConfig(format!("dyadic N = {} out of range", q.n_dyadic)));
    }
    let sym = PhaseSymbol::new(q.h);
    let pi = std::f64::consts::PI;
    let lo = 0.5 * pi * q.n_dyadic / q.h;
    let hi = 2.0 * pi * q.n_dyadic / q.h;
    let width = hi - lo;
    // |Θ'| ≤ |x| + |t| s_h'(hi); s_h' increases with |ξ|
    let slope = q.x.abs() + q.t.abs() * sym.s1(hi);
    let quarter = 0.5 * pi / slope.max(1e-300);
    // the bump shoulders carry large derivatives, so keep at least 64 panels
    // across the band regardless of the oscillation count
    let mut panel_w = quarter.min(width / 64.0);
    panel_w /= (1u64 << q.refine) as f64;
    let panels = (width / panel_w).ceil() as usize;
    if panels > q.max_panels {
        return Err(Error::UnderResolved(format!(
            "kernel query needs {panels} panels (cap {})",
            q.max_panels
        )));
    }
    let sg = q.sign.as_f64();
    let integrand = |xi: f64| -> Complex64 {
        let phase = sg * q.t * sym.s(xi) + q.x * xi;
        let (s, c) = phase.sin_cos();
        Complex64::new(c, s) * psi(q.h, q.n_dyadic, xi)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for &side in &[-1.0f64, 1.0] {
        for p in 0..panels {
            let a = lo + width * p as f64 / panels as f64;
            let b = lo + width * (p + 1) as f64 / panels as f64;
            let (a, b) = if side < 0.0 { (-b, -a) } else { (a, b) };
            let c = 0.5 * (a + b);
            let r = 0.5 * (b - a);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(xn, wn) in GL16.iter() {
                acc += integrand(c + r * xn) * wn;
            }
            total += acc * r;
        }
    }
    Ok(total / (2.0 * pi))
}

/// The regime of the |t| ≤ 1 piecewise bound a query falls into, and the
/// bound's value there.
pub fn piecewise_bound(q: &KernelQuery) -> (&'static str, f64) {
    let nh = q.n_dyadic / q.h;
    let x = q.x.abs();
    if x <= 1.0 / nh {
        ("core", nh)
    } else if x <= (q.n_dyadic / q.h).powi(2) {
        ("oscillatory", (nh / x).sqrt())
    } else {
        ("tail", 1.0 / (nh * x * x))
    }
}

/// (h/(N|t|))^{1/2}, the dispersive bound of the kernel lemma.
pub fn dispersive_bound(q: &KernelQuery) -> f64 {
    (q.h / (q.n_dyadic * q.t.abs())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(t: f64, x: f64, n_dyadic: f64, h: f64) -> KernelQuery {
        KernelQuery::new(t, x, n_dyadic, h, Sign::Plus)
    }

    #[test]
    fn self_convergence_under_refinement() {
        for &(t, x) in &[(0.0, 3.0), (0.3, 1.0), (1.0, 20.0), (0.05, 150.0)] {
            let base = kernel_eval(&q(t, x, 0.5, 0.25)).unwrap();
            let fine = kernel_eval(&q(t, x, 0.5, 0.25).refined(1)).unwrap();
            assert!((base - fine).norm() < 1e-9, "t={t} x={x}: {}", (base - fine).norm());
        }
    }

    #[test]
    fn zero_time_decay() {
        // |K_N(0, x)| ≤ C/|x| for |x| ≥ h/N
        let h = 0.25;
        let n_dyadic = 0.5;
        let mut worst: f64 = 0.0;
        for k in 0..24 {
            let x = (h / n_dyadic) * 1.3f64.powi(k);
            let v = kernel_eval(&q(0.0, x, n_dyadic, h)).unwrap().norm();
            worst = worst.max(v * x);
        }
        assert!(worst < 2.0, "t=0 decay constant {worst}");
    }

    #[test]
    fn dispersive_decay_sample() {
        let h = 0.25;
        let n_dyadic = 0.5;
        let mut worst: f64 = 0.0;
        for &t in &[0.1, 0.4, 1.0, 3.0] {
            for &x in &[0.5, 2.0, 8.0, 32.0] {
                let kq = q(t, x, n_dyadic, h);
                let v = kernel_eval(&kq).unwrap().norm();
                worst = worst.max(v / dispersive_bound(&kq));
            }
        }
        assert!(worst < 3.0, "dispersive constant {worst}");
        assert!(worst > 0.01);
    }

    #[test]
    fn rejects_blowup_queries() {
        let mut kq = q(1.0, 1.0, 1.0, 0.001);
        kq.max_panels = 128;
        assert!(matches!(kernel_eval(&kq), Err(Error::UnderResolved(_))));
    }
}
