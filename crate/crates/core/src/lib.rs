//! Spectral laboratory for FPU lattice dynamics and their KdV continuum
//! limit: lattice Fourier calculus, exact linear propagators, high-order
//! solvers for the coupled/decoupled FPU systems and KdV, the piecewise-
//! linear interpolation bridge to the line, and numerical verifiers for the
//! dispersive estimates the convergence analysis rests on.

pub mod error;
pub mod grid;
pub mod harness;
pub mod interp;
pub mod lp;
pub mod multiplier;
pub mod norms;
pub mod fpu;
pub mod phase;
pub mod potential;
pub mod propagators;
pub mod solvers;
pub mod verifiers;

pub use error::{Error, Result};
pub use grid::{dft_forward, dft_inverse, LatticeField, LatticeGrid, Spectrum};
