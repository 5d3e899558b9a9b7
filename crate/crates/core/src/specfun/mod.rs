//! Special functions: Airy `Ai`/`Ai'` and tabulated solutions of
//! `u'' = q(y) u` (Weber-type equations).

mod airy;
mod dd;
mod weber;

pub use airy::{airy, airy_ai, airy_ai_prime};
pub use weber::{weber_solve, OdeTable, Parity, Sign, SpecfunError, WeberSpec};
