//! Discrete Fourier multipliers and the standard symbol table.
//!
//! A multiplier is a symbol ξ ↦ m(ξ) applied coefficient-wise on the dual
//! grid. Symbols are tied to the spacing h they were built for, so applying
//! one to a spectrum from a different lattice is rejected.
//!
//! The self-conjugate edge frequency ξ = -π/h has no partner mode on a
//! periodic grid; odd imaginary symbols therefore turn edge energy into an
//! imaginary component. Solvers and synthetic data keep that single mode
//! empty.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{LatticeGrid, Spectrum};

type SymbolFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct MultiplierSymbol {
    pub name: &'static str,
    /// Spacing the symbol was built for, 0.0 for spacing-free symbols.
    pub h: f64,
    /// Homogeneity order at ξ → 0 (e.g. 1 for ∇_h, -2 for Δ_h⁻¹).
    pub order_at_zero: f64,
    /// Whether the symbol vanishes at ξ = 0 and inverts a derivative, so the
    /// input must pass the zero-mean gate.
    pub requires_zero_mean: bool,
    eval: Arc<SymbolFn>,
}

impl MultiplierSymbol {
    pub fn new(
        name: &'static str,
        h: f64,
        order_at_zero: f64,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { name, h, order_at_zero, requires_zero_mean: false, eval: Arc::new(eval) }
    }

    pub fn new_inverse(
        name: &'static str,
        h: f64,
        order_at_zero: f64,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { name, h, order_at_zero, requires_zero_mean: true, eval: Arc::new(eval) }
    }

    #[inline]
    pub fn eval(&self, xi: f64) -> Complex64 {
        (self.eval)(xi)
    }

    fn check_grid(&self, grid: &LatticeGrid) -> Result<()> {
        if self.h != 0.0 && self.h != grid.spacing() {
            return Err(Error::GridMismatch(format!(
                "symbol {} built for h = {} applied on grid with h = {}",
                self.name,
                self.h,
                grid.spacing()
            )));
        }
        Ok(())
    }
}

/// coeffs'(ξ) = m(ξ)·coeffs(ξ)
pub fn apply_multiplier(s: &Spectrum, m: &MultiplierSymbol) -> Result<Spectrum> {
    m.check_grid(&s.grid)?;
    if m.requires_zero_mean && !s.zero_mean_within_gate() {
        return Err(Error::NonzeroMean(format!(
            "symbol {} inverts a derivative; project the zero mode out first",
            m.name
        )));
    }
    let coeffs = s
        .grid
        .frequencies()
        .iter()
        .zip(&s.coeffs)
        .map(|(&xi, c)| m.eval(xi) * c)
        .collect();
    Ok(Spectrum { grid: s.grid.clone(), coeffs })
}

/// (2/h) sin(hξ/2), the real odd symbol σ with ∇_h = iσ.
#[inline]
pub fn nabla_sigma(h: f64, xi: f64) -> f64 {
    (2.0 / h) * (0.5 * h * xi).sin()
}

/// The symbols of Definition-style discrete differentials at spacing h.
pub struct SymbolTable {
    pub h: f64,
}

impl SymbolTable {
    pub fn new(h: f64) -> Self {
        Self { h }
    }

    /// ∇_h ↦ (2i/h) sin(hξ/2)
    pub fn nabla(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("nabla_h", h, 1.0, move |xi| {
            Complex64::new(0.0, nabla_sigma(h, xi))
        })
    }

    /// ∇_h⁻¹ ↦ h/(2i sin(hξ/2)), zero on the zero mode.
    pub fn nabla_inverse(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new_inverse("nabla_h_inverse", h, -1.0, move |xi| {
            let s = nabla_sigma(h, xi);
            if s == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / s)
            }
        })
    }

    /// |∇_h| ↦ |(2/h) sin(hξ/2)|
    pub fn nabla_abs(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("abs_nabla_h", h, 1.0, move |xi| {
            Complex64::new(nabla_sigma(h, xi).abs(), 0.0)
        })
    }

    /// ⟨∇_h⟩ ↦ (1 + (2/h)² sin²(hξ/2))^{1/2}
    pub fn nabla_bracket(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("bracket_nabla_h", h, 0.0, move |xi| {
            let s = nabla_sigma(h, xi);
            Complex64::new((1.0 + s * s).sqrt(), 0.0)
        })
    }

    /// ∂_h ↦ iξ
    pub fn partial(&self) -> MultiplierSymbol {
        MultiplierSymbol::new("partial_h", self.h, 1.0, |xi| Complex64::new(0.0, xi))
    }

    /// |∂_h| ↦ |ξ|
    pub fn partial_abs(&self) -> MultiplierSymbol {
        MultiplierSymbol::new("abs_partial_h", self.h, 1.0, |xi| Complex64::new(xi.abs(), 0.0))
    }

    /// ⟨∂_h⟩ ↦ (1 + ξ²)^{1/2}
    pub fn partial_bracket(&self) -> MultiplierSymbol {
        MultiplierSymbol::new("bracket_partial_h", self.h, 0.0, |xi| {
            Complex64::new((1.0 + xi * xi).sqrt(), 0.0)
        })
    }

    /// ∂_h⁺ ↦ (e^{ihξ} - 1)/h
    pub fn forward_diff(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("partial_h_plus", h, 1.0, move |xi| {
            let z = Complex64::new(0.0, h * xi).exp() - 1.0;
            z / h
        })
    }

    /// Δ_h ↦ -(4/h²) sin²(hξ/2)
    pub fn laplacian(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("laplacian_h", h, 2.0, move |xi| {
            let s = (0.5 * h * xi).sin();
            Complex64::new(-4.0 / (h * h) * s * s, 0.0)
        })
    }

    /// cos(-ih∂_h/2) ↦ cos(hξ/2)
    pub fn half_cos(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("half_cos", h, 0.0, move |xi| {
            Complex64::new((0.5 * h * xi).cos(), 0.0)
        })
    }

    /// Hilbert transform ↦ -i sign(ξ)
    pub fn hilbert(&self) -> MultiplierSymbol {
        MultiplierSymbol::new("hilbert", self.h, 0.0, |xi| {
            Complex64::new(0.0, -sign(xi))
        })
    }

    /// Half-site shift e^{-ih ξ/2}; composing with ∂_h⁺ reproduces ∇_h.
    pub fn half_shift_back(&self) -> MultiplierSymbol {
        let h = self.h;
        MultiplierSymbol::new("half_shift_back", h, 0.0, move |xi| {
            Complex64::new(0.0, -0.5 * h * xi).exp()
        })
    }

    /// |∂_h|^s ↦ |ξ|^s, zero mode handled like an inverse when s < 0.
    pub fn partial_abs_pow(&self, s: f64) -> MultiplierSymbol {
        let mk = move |xi: f64| {
            if xi == 0.0 {
                if s > 0.0 {
                    Complex64::new(0.0, 0.0)
                } else if s == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else {
                Complex64::new(xi.abs().powf(s), 0.0)
            }
        };
        if s < 0.0 {
            MultiplierSymbol::new_inverse("abs_partial_pow", self.h, s, mk)
        } else {
            MultiplierSymbol::new("abs_partial_pow", self.h, s, mk)
        }
    }
}

/// The full table from the operation contract.
pub fn symbol_table(h: f64) -> Vec<MultiplierSymbol> {
    let t = SymbolTable::new(h);
    vec![
        t.nabla(),
        t.partial(),
        t.partial_abs(),
        t.partial_bracket(),
        t.forward_diff(),
        t.laplacian(),
        t.half_cos(),
        t.hilbert(),
        t.nabla_abs(),
        t.nabla_bracket(),
        t.nabla_inverse(),
    ]
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
