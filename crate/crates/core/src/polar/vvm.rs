//! Comparison of an exact amplitude with the Van Vleck-Morette amplitude
//! `|∂²S / ∂x_f ∂x_i|`.

use serde::Serialize;

use super::PolarError;
use crate::expr::{Bindings, Expr, Var};

#[derive(Clone, Debug, Serialize)]
pub struct VvmReport {
    pub matches: bool,
    /// Mean of `A^2 / |M|` over samples where `M != 0`.
    pub ratio: f64,
    /// `(max - min) / |mean|` of the ratio.
    pub relative_variation: f64,
    pub mixed_derivative: Expr,
    /// `(x, t, A^2/|M|)`, `None` where `M` vanishes.
    pub ratio_field: Vec<(f64, f64, Option<f64>)>,
}

/// `phase` is written in the final position `x`, time `t` and the initial
/// position parameter `initial`, which is bound to `initial_value` for
/// evaluation. `A^2` matches when it is proportional to `|M|` with a
/// constant ratio to relative tolerance `tol`.
pub fn vvm_check(
    phase: &Expr,
    initial: &str,
    initial_value: f64,
    amplitude: &Expr,
    sample: &[(f64, f64)],
    tol: f64,
) -> Result<VvmReport, PolarError> {
    let xi = Var::param(initial);
    let mixed = phase.dx().diff(&xi);
    let bind = Bindings::new().with(initial, initial_value);
    let m = mixed.bind(&bind).compile()?;
    let density = amplitude.bind(&bind).powi(2).compile()?;

    let mut ratio_field = Vec::with_capacity(sample.len());
    let mut ratios = Vec::new();
    for &(x, t) in sample {
        let mv = m.eval(x, t)?;
        let r = if mv.abs() > 1e-300 {
            let r = density.eval(x, t)? / mv.abs();
            ratios.push(r);
            Some(r)
        } else {
            None
        };
        ratio_field.push((x, t, r));
    }
    let complete = !ratios.is_empty() && ratios.len() == sample.len();
    let (ratio, variation) = if ratios.is_empty() {
        (f64::NAN, f64::INFINITY)
    } else {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (mean, (hi - lo) / mean.abs())
    };
    Ok(VvmReport {
        matches: complete && variation <= tol,
        ratio,
        relative_variation: variation,
        mixed_derivative: mixed,
        ratio_field,
    })
}
