//! Polar (Madelung) form `psi = A exp(iS/hbar)` and the generating-function
//! transform: from `f(x, t)` build `A = sqrt(f')`, `S = mu - m ∫_0^x ḟ/f'`,
//! the Bohm potential, and the external potential and force that make `psi`
//! an exact solution. Residual checks for every governing equation live in
//! [`residual`].

mod residual;
mod vvm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, CompiledExpr, Expr, ExprError, Var};
use crate::numerics::{cumulative_from_zero, Field, Grid, NumericsError};

pub use residual::{
    bohm_consistency, continuity_residual, continuity_residual_numeric, qhje_residual, schrodinger_residual,
    ResidualReport,
};
pub use vvm::{vvm_check, VvmReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("f' = {value} <= 0 at x = {x}, t = {t}; A = sqrt(f') is undefined there")]
    NonPositiveSlope { x: f64, t: f64, value: f64 },
    #[error("integration path from 0 to x = {x} crosses f' = 0 at t = {t}")]
    SingularPath { x: f64, t: f64 },
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
}

/// `hbar` and `m`; both strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self, PolarError> {
        let c = PhysicalConstants { hbar, mass };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), PolarError> {
        if self.hbar > 0.0 && self.mass > 0.0 && self.hbar.is_finite() && self.mass.is_finite() {
            Ok(())
        } else {
            Err(PolarError::InvalidConstants(format!(
                "hbar = {} and m = {} must be positive",
                self.hbar, self.mass
            )))
        }
    }

    /// Bindings for the reserved identifiers `hbar` and `m`.
    pub fn bindings(&self) -> Bindings {
        Bindings::new().with("hbar", self.hbar).with("m", self.mass)
    }

    pub fn hbar_expr(&self) -> Expr {
        Expr::num(self.hbar)
    }

    pub fn mass_expr(&self) -> Expr {
        Expr::num(self.mass)
    }
}

/// A region of space-time where a bundle's closed forms are not used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exclusion {
    /// `|expr| < threshold`.
    AbsBelow { expr: Expr, threshold: f64 },
    /// `expr <= 0`.
    NonPositive { expr: Expr },
}

impl Exclusion {
    pub fn describe(&self) -> String {
        match self {
            Exclusion::AbsBelow { expr, threshold } => format!("|{expr}| < {threshold}"),
            Exclusion::NonPositive { expr } => format!("{expr} <= 0"),
        }
    }
}

/// Compiled form of a bundle's exclusions.
pub struct ExclusionMask {
    rules: Vec<(CompiledExpr, Option<f64>)>,
}

impl ExclusionMask {
    pub fn new(exclusions: &[Exclusion]) -> Result<Self, PolarError> {
        let rules = exclusions
            .iter()
            .map(|e| match e {
                Exclusion::AbsBelow { expr, threshold } => Ok((expr.compile()?, Some(*threshold))),
                Exclusion::NonPositive { expr } => Ok((expr.compile()?, None)),
            })
            .collect::<Result<_, ExprError>>()?;
        Ok(ExclusionMask { rules })
    }

    pub fn excludes(&self, x: f64, t: f64) -> bool {
        self.rules.iter().any(|(c, thr)| {
            let v = c.eval_raw(x, t);
            match thr {
                _ if !v.is_finite() => true,
                Some(th) => v.abs() < *th,
                None => v <= 0.0,
            }
        })
    }
}

/// A complete exact solution with its declared potentials.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionBundle {
    pub family_id: String,
    pub consts: PhysicalConstants,
    /// Generating function, when the solution comes from one.
    pub f: Option<Expr>,
    pub amplitude: Expr,
    pub phase: Expr,
    /// Gauge function of `t`.
    pub mu: Expr,
    pub potential: Expr,
    pub bohm_potential: Expr,
    pub vanishing_bohm: bool,
    pub exclusions: Vec<Exclusion>,
}

impl SolutionBundle {
    pub fn exclusion_mask(&self) -> Result<ExclusionMask, PolarError> {
        ExclusionMask::new(&self.exclusions)
    }

    /// Copy with a different phase, e.g. for negative controls.
    pub fn with_phase(&self, phase: Expr) -> SolutionBundle {
        SolutionBundle { phase, ..self.clone() }
    }

    /// `(Re psi, Im psi)` at a point.
    pub fn psi(&self, x: f64, t: f64) -> Result<(f64, f64), PolarError> {
        let a = self.amplitude.eval_xt(x, t)?;
        let s = self.phase.eval_xt(x, t)?;
        let (sin, cos) = (s / self.consts.hbar).sin_cos();
        Ok((a * cos, a * sin))
    }
}

/// `A = sqrt(f')`.
pub fn amplitude_from_f(f: &Expr) -> Expr {
    f.dx().sqrt()
}

/// Check `f' > 0` at the given points.
pub fn check_amplitude_domain(f: &Expr, points: &[(f64, f64)]) -> Result<(), PolarError> {
    let slope = f.dx();
    for &(x, t) in points {
        let value = slope.eval_xt(x, t)?;
        if value <= 0.0 {
            return Err(PolarError::NonPositiveSlope { x, t, value });
        }
    }
    Ok(())
}

/// `S = mu(t) - m ∫_0^x ḟ/f' dx̃` as an expression; the integral is
/// evaluated by quadrature whenever the expression is.
pub fn phase_from_f(f: &Expr, mu: &Expr, consts: &PhysicalConstants) -> Expr {
    let ratio = f.dt() / f.dx();
    mu - consts.mass * Expr::integral(Var::X, ratio)
}

/// `S` on a grid by cumulative Simpson quadrature along each `x` row.
///
/// The grid must contain `x = 0`; a row whose path from 0 meets `f' <= 0`
/// is reported as a singular path.
pub fn phase_on_grid(f: &Expr, mu: &Expr, grid: &Grid, consts: &PhysicalConstants) -> Result<Field, PolarError> {
    let slope = f.dx().compile()?;
    let rate = f.dt().compile()?;
    let mu = mu.compile()?;
    let mut out = Field::zeros(*grid);
    let (h, x0) = (grid.dx(), grid.x_min);
    for j in 0..grid.nt {
        let t = grid.t(j);
        let mut row = Vec::with_capacity(grid.nx);
        for i in 0..grid.nx {
            let x = grid.x(i);
            let d = slope.eval(x, t)?;
            if d <= 0.0 {
                return Err(PolarError::SingularPath { x, t });
            }
            row.push(rate.eval(x, t)? / d);
        }
        let cum = cumulative_from_zero(&row, x0, h)?;
        let m = mu.eval(0.0, t)?;
        for (i, c) in cum.iter().enumerate() {
            out.values[grid.index(i, j)] = m - consts.mass * c;
        }
    }
    Ok(out)
}

/// `V_B = -hbar^2 A'' / (2 m A)`.
pub fn bohm_potential(amplitude: &Expr, consts: &PhysicalConstants) -> Expr {
    let h2 = consts.hbar * consts.hbar;
    -(h2 / (2.0 * consts.mass)) * amplitude.dx().dx() / amplitude
}

/// Bohm potential from a tabulated amplitude by central differences along
/// `x`; nodes where `A` is (nearly) zero are excluded.
pub fn bohm_potential_field(amplitude: &Field, consts: &PhysicalConstants) -> Result<Field, PolarError> {
    let d2 = crate::numerics::fd_derivative(amplitude, crate::numerics::Axis::X, 2)?;
    let scale = amplitude.linf();
    let mut out = d2.clone();
    for k in 0..out.values.len() {
        let a = amplitude.values[k];
        if out.excluded[k] || a.abs() <= 1e-12 * scale {
            out.excluded[k] = true;
            out.values[k] = f64::NAN;
        } else {
            out.values[k] = -consts.hbar * consts.hbar * d2.values[k] / (2.0 * consts.mass * a);
        }
    }
    Ok(out)
}

/// `f'''/f' - f''^2 / (2 f'^2)`; zero exactly when the Bohm potential of
/// `sqrt(f')` vanishes.
pub fn bohm_kernel(f: &Expr) -> Expr {
    let d1 = f.dx();
    let d2 = d1.dx();
    let d3 = d2.dx();
    &d3 / &d1 - 0.5 * d2.powi(2) / d1.powi(2)
}

/// Largest `|f'''/f' - f''^2/(2 f'^2)|` over the sample points.
pub fn vanishing_bohm_residual(f: &Expr, sample: &[(f64, f64)]) -> Result<f64, PolarError> {
    check_amplitude_domain(f, sample)?;
    let w = bohm_kernel(f).compile()?;
    let mut worst: f64 = 0.0;
    for &(x, t) in sample {
        worst = worst.max(w.eval(x, t)?.abs());
    }
    Ok(worst)
}

/// Integrand of the non-local term of the master equation,
/// `ḟ ḟ'/f'^2 - f̈/f'`.
fn master_integrand(f: &Expr) -> Expr {
    let d1 = f.dx();
    let rate = f.dt();
    &rate * rate.dx() / d1.powi(2) - rate.dt() / &d1
}

/// External potential for which `f` and `mu` generate an exact solution:
///
/// `V = -[ m/2 (ḟ/f')^2 - hbar^2/(4m) W + m ∫_0^x (ḟḟ'/f'^2 - f̈/f') + mu' ]`
/// with `W` the [`bohm_kernel`].
pub fn infer_potential(f: &Expr, mu: &Expr, consts: &PhysicalConstants) -> Expr {
    let m = consts.mass;
    let h2 = consts.hbar * consts.hbar;
    let velocity = f.dt() / f.dx();
    let kinetic = 0.5 * m * velocity.powi(2);
    let quantum = (h2 / (4.0 * m)) * bohm_kernel(f);
    let nonlocal = m * Expr::integral(Var::X, master_integrand(f));
    -(kinetic - quantum + nonlocal + mu.dt())
}

/// [`infer_potential`] evaluated on a grid with the non-local term computed
/// by cumulative Simpson quadrature along each row.
pub fn infer_potential_on_grid(
    f: &Expr,
    mu: &Expr,
    grid: &Grid,
    consts: &PhysicalConstants,
) -> Result<Field, PolarError> {
    let m = consts.mass;
    let h2 = consts.hbar * consts.hbar;
    let local = {
        let velocity = f.dt() / f.dx();
        (0.5 * m * velocity.powi(2) - (h2 / (4.0 * m)) * bohm_kernel(f) + mu.dt()).compile()?
    };
    let integrand = master_integrand(f).compile()?;
    let slope = f.dx().compile()?;
    let mut out = Field::zeros(*grid);
    for j in 0..grid.nt {
        let t = grid.t(j);
        let mut row = Vec::with_capacity(grid.nx);
        for i in 0..grid.nx {
            let x = grid.x(i);
            if slope.eval(x, t)? <= 0.0 {
                return Err(PolarError::SingularPath { x, t });
            }
            row.push(integrand.eval(x, t)?);
        }
        let cum = cumulative_from_zero(&row, grid.x_min, grid.dx())?;
        for i in 0..grid.nx {
            let k = grid.index(i, j);
            out.values[k] = -(local.eval(grid.x(i), t)? + m * cum[i]);
        }
    }
    Ok(out)
}

/// Force `F = -V'`:
/// `F = (m/2)((ḟ/f')^2)' - hbar^2/(4m) W' + m (ḟḟ'/f'^2 - f̈/f')`.
pub fn infer_force(f: &Expr, consts: &PhysicalConstants) -> Expr {
    let m = consts.mass;
    let h2 = consts.hbar * consts.hbar;
    let velocity = f.dt() / f.dx();
    (0.5 * m * velocity.powi(2)).dx() - (h2 / (4.0 * m)) * bohm_kernel(f).dx() + m * master_integrand(f)
}

/// `f = (a^2/3) x^3 + a b x^2 + b^2 x + c`, so that `f' = (a x + b)^2`.
pub fn cubic_f(a: &Expr, b: &Expr, c: &Expr) -> Expr {
    let x = Expr::x();
    a.powi(2) / 3.0 * x.powi(3) + a * b * x.powi(2) + b.powi(2) * &x + c
}

/// Bundle generated by `f` and `mu`: `A = sqrt(f')`, `S` from
/// [`phase_from_f`], `V` from [`infer_potential`], `V_B` from
/// [`bohm_potential`]. Regions with `f' <= 0` are excluded.
pub fn bundle_from_f(
    family_id: &str,
    f: &Expr,
    mu: &Expr,
    consts: &PhysicalConstants,
) -> Result<SolutionBundle, PolarError> {
    consts.validate()?;
    let b = consts.bindings();
    let f = f.bind(&b);
    let mu = mu.bind(&b);
    for v in f.free_vars().iter().chain(mu.free_vars().iter()) {
        if let Var::Param(p) = v {
            return Err(ExprError::Unbound(p.to_string()).into());
        }
    }
    let amplitude = amplitude_from_f(&f);
    let vb = bohm_potential(&amplitude, consts);
    Ok(SolutionBundle {
        family_id: family_id.to_string(),
        consts: *consts,
        phase: phase_from_f(&f, &mu, consts),
        potential: infer_potential(&f, &mu, consts),
        bohm_potential: vb,
        vanishing_bohm: false,
        exclusions: vec![Exclusion::NonPositive { expr: f.dx() }],
        amplitude,
        mu,
        f: Some(f),
    })
}
