//! Spectral laboratory for Kirchhoff-type strictly hyperbolic systems.
//!
//! The library solves first-order systems `D_t U = A(s(t), D_x) U` whose
//! coefficient matrix depends on a scalar nonlocal functional
//! `s(t) = <S Û(t), Û(t)>` of the solution itself. Everything happens on the
//! Fourier side: states are sampled on a radial × spherical frequency grid
//! and all norms are evaluated by Plancherel.
//!
//! Two independent solution routes are provided and cross-checked:
//!
//! * a direct method-of-lines integration of the coupled nonlinear system
//!   ([`solver::direct_solve`]), and
//! * an asymptotic-integration route that freezes a coefficient path,
//!   diagonalises the symbol, factors the oscillation into phases and solves
//!   amplitude equations ([`asymp`]), wrapped into a fixed-point iteration on
//!   nonlocal trajectories ([`solver::fixed_point_solve`]).
//!
//! The [`classnorms`] module computes the data-class norms that gate global
//! existence, and [`diagnostics`] verifies structural estimates (the
//! `s' = 2(I+J)` split, total-variation bounds, coefficient-class membership)
//! on realized runs.

pub mod asymp;
pub mod classnorms;
pub mod diag;
pub mod diagnostics;
pub mod error;
pub mod families;
pub mod grid;
pub mod linalg;
pub mod reduce;
pub mod solver;
pub mod symbol;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (symbols, diagonalizers, amplitudes are all small m×m).
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
