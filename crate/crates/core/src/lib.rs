//! Exact solutions of the one-dimensional Schrödinger equation generated
//! from a single function `f(x, t)`, together with the numerical machinery
//! that checks them.
//!
//! The amplitude and phase `A = sqrt(f')`, `S = mu(t) - m ∫_0^x (df/dt)/f'`
//! satisfy the continuity equation identically; the potential that makes
//! `psi = A exp(iS/hbar)` an exact solution then follows from the quantum
//! Hamilton-Jacobi equation.

pub mod expr;
pub mod families;
pub mod numerics;
pub mod polar;
pub mod propagate;
pub mod specfun;
