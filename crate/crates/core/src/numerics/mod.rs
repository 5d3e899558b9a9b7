//! Grids, finite differences, quadrature, ODE integration and Bohmian
//! trajectories.

mod fd;
mod grid;
pub mod ode;
pub mod quadrature;
mod trajectory;

use thiserror::Error;

pub use fd::{boundary_width, derivative_line, fd_derivative, Axis};
pub use grid::{Field, Grid};
pub use ode::{rk4_adaptive, Rk4Options};
pub use quadrature::{cumulative_from_zero, gauss_legendre_0_to};
pub use trajectory::{bohmian_trajectory, fit_acceleration, AccelerationFit, Guidance, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("axis index {0} out of range (0 = x, 1 = t)")]
    InvalidAxis(usize),
    #[error("derivative order {0} not supported (1, 2 or 3)")]
    InvalidOrder(u8),
    #[error("integration path from 0 crosses an excluded node at x = {x}, t = {t}")]
    ExcludedPath { x: f64, t: f64 },
    #[error("origin outside the integration line [{lo}, {hi}]")]
    OriginOutside { lo: f64, hi: f64 },
    #[error("trajectory left the window at t = {t} (x = {x})")]
    ExitedGrid { t: f64, x: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("need at least 16 samples, got {0}")]
    TooFewSamples(usize),
    #[error("domain error: {0}")]
    Domain(String),
}
