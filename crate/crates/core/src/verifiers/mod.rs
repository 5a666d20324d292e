//! Numerical verification of the dispersive estimates: kernel decay,
//! bilinear-integrand bounds, and the space-time restriction norms.

pub mod bilinear;
pub mod kernels;
pub mod quadrature;
pub mod xsb;
