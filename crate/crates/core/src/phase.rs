//! Unit-modulus phase factors `e^{i t ω}` with extended-precision argument
//! reduction.
//!
//! The propagator phases reach `t·ω ~ 10^7` at the smallest spacings; a plain
//! f64 product followed by `sin_cos` would lose up to ten digits of phase.
//! The product is formed exactly as a double-double pair and reduced modulo
//! 2π before exponentiation, so the reduced argument carries the full
//! precision of the inputs.

use num_complex::Complex64;

const TWO_PI_HI: f64 = 6.283185307179586;
const TWO_PI_LO: f64 = 2.449293598294706e-16;

/// Error-free sum: returns (s, e) with s + e = a + b exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free product via FMA: returns (p, e) with p + e = a * b exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Reduce the double-double value hi + lo modulo 2π into roughly [-π, π].
#[inline]
pub fn reduce_two_pi(hi: f64, lo: f64) -> f64 {
    let q = (hi / TWO_PI_HI).round();
    if q == 0.0 {
        return hi + lo;
    }
    let (p1, p2) = two_prod(q, TWO_PI_HI);
    let (s1, s2) = two_sum(hi, -p1);
    s1 + (s2 + lo - p2 - q * TWO_PI_LO)
}

/// e^{i t ω} with the product t·ω formed exactly and reduced mod 2π.
#[inline]
pub fn rotation(t: f64, omega: f64) -> Complex64 {
    let (hi, lo) = two_prod(t, omega);
    let theta = reduce_two_pi(hi, lo);
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}
