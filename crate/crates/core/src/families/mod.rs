//! Builtin exact solutions as parameterized [`SolutionBundle`] builders.
//!
//! Every builder returns closed forms for `A`, `S`, `mu`, the declared
//! external potential `V` and Bohm potential `V_B`, so that the residual
//! checks in [`crate::polar`] can cross-validate them.

mod catalog;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Var};
use crate::numerics::NumericsError;
use crate::polar::{cubic_f, Exclusion, PhysicalConstants, PolarError, SolutionBundle};
use crate::specfun::{OdeTable, Parity, Sign, SpecfunError};

pub use catalog::{default_grid, list_families, FamilyDescriptor, GridSpec};

/// Threshold for the singular times of the oscillator families and the
/// `x = 0` singularity of [`FamilyConfig::PowerCosine`].
pub const SINGULAR_THRESHOLD: f64 = 1e-3;

/// Default half width of the `y` interval tabulated for ODE-defined profiles.
pub const DEFAULT_TABLE_HALF_WIDTH: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{0} has no declared packet acceleration")]
    Unsupported(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn invalid(name: &'static str, reason: impl Into<String>) -> FamilyError {
    FamilyError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Profile `Z(y)` of a self-similar packet `sigma^{-1/2} Z(x / sigma)`,
/// with `Z'' / Z = zeta1 y^2 + zeta2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingKind {
    /// `Z = exp(-q y^2)`, so `zeta1 = 4 q^2`, `zeta2 = -2 q`.
    Gaussian { q: f64 },
    /// `zeta1 = 0`: `Z` is a cosine, a hyperbolic cosine or constant.
    Trig { zeta2: f64 },
    /// General parabolic-cylinder profile from the ODE tabulation.
    Weber {
        zeta1: f64,
        zeta2: f64,
        #[serde(default)]
        parity: Parity,
    },
}

impl ScalingKind {
    /// `(zeta1, zeta2)`.
    pub fn zetas(&self) -> (f64, f64) {
        match *self {
            ScalingKind::Gaussian { q } => (4.0 * q * q, -2.0 * q),
            ScalingKind::Trig { zeta2 } => (0.0, zeta2),
            ScalingKind::Weber { zeta1, zeta2, .. } => (zeta1, zeta2),
        }
    }
}

fn default_table_half_width() -> f64 {
    DEFAULT_TABLE_HALF_WIDTH
}

/// Selects one builtin family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilyConfig {
    PlaneWave {
        k: f64,
    },
    NonSeparableFree {
        alpha: f64,
        beta: f64,
        gamma: f64,
        t_i: f64,
    },
    ExponentialFree {
        lambda: f64,
        k: f64,
    },
    AiryPacket {
        beta: f64,
    },
    ScalingPacket {
        kind: ScalingKind,
        alpha: f64,
        beta: f64,
    },
    #[serde(rename = "oscillator_vvm")]
    OscillatorVvm {
        omega: f64,
        alpha: f64,
        t_i: f64,
        x_i: f64,
    },
    OscillatorAlt1 {
        omega: f64,
        t_i: f64,
    },
    OscillatorAlt3 {
        omega: f64,
        t_i: f64,
    },
    ExpCubic {
        a: f64,
        b: f64,
        c: f64,
        mu: f64,
    },
    PowerCosine {
        n: u32,
        omega: f64,
        t_i: f64,
    },
    AiryForced {
        beta: f64,
        zeta: Expr,
        sign: Sign,
    },
    WeberOscillator {
        beta: f64,
        zeta0: f64,
        sign: Sign,
        #[serde(default)]
        parity: Parity,
        #[serde(default = "default_table_half_width")]
        table_half_width: f64,
    },
    GeneralPower {
        n: u32,
        beta: f64,
        zeta: Expr,
        sign: Sign,
        #[serde(default)]
        parity: Parity,
        #[serde(default = "default_table_half_width")]
        table_half_width: f64,
    },
}

/// The four sub-cases of the exponential-cubic force family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpCubicPreset {
    /// `a = c = 0`: `F = 4 m mu^2 x`.
    LinearB,
    /// `b = c = 0`: `F = (4/9) m mu^2 x`.
    LinearA,
    /// `a = 0`.
    NoA,
    /// `b = 0`.
    NoB,
}

impl FamilyConfig {
    pub fn id(&self) -> &'static str {
        match self {
            FamilyConfig::PlaneWave { .. } => "plane_wave",
            FamilyConfig::NonSeparableFree { .. } => "non_separable_free",
            FamilyConfig::ExponentialFree { .. } => "exponential_free",
            FamilyConfig::AiryPacket { .. } => "airy_packet",
            FamilyConfig::ScalingPacket { .. } => "scaling_packet",
            FamilyConfig::OscillatorVvm { .. } => "oscillator_vvm",
            FamilyConfig::OscillatorAlt1 { .. } => "oscillator_alt1",
            FamilyConfig::OscillatorAlt3 { .. } => "oscillator_alt3",
            FamilyConfig::ExpCubic { .. } => "exp_cubic",
            FamilyConfig::PowerCosine { .. } => "power_cosine",
            FamilyConfig::AiryForced { .. } => "airy_forced",
            FamilyConfig::WeberOscillator { .. } => "weber_oscillator",
            FamilyConfig::GeneralPower { .. } => "general_power",
        }
    }

    /// Demo parameters of the family with the given id.
    pub fn default_for(id: &str) -> Option<FamilyConfig> {
        list_families().into_iter().find(|d| d.id == id).map(|d| d.defaults)
    }

    pub fn exp_cubic_preset(preset: ExpCubicPreset, mu: f64) -> FamilyConfig {
        let (a, b, c) = match preset {
            ExpCubicPreset::LinearB => (0.0, 1.0, 0.0),
            ExpCubicPreset::LinearA => (1.0, 0.0, 0.0),
            ExpCubicPreset::NoA => (0.0, 1.0, 0.5),
            ExpCubicPreset::NoB => (1.0, 0.0, 0.5),
        };
        FamilyConfig::ExpCubic { a, b, c, mu }
    }

    /// Whether the family's wavefunctions have identically zero Bohm potential.
    pub fn vanishing_bohm(&self) -> bool {
        match *self {
            FamilyConfig::PlaneWave { .. }
            | FamilyConfig::NonSeparableFree { .. }
            | FamilyConfig::OscillatorVvm { .. }
            | FamilyConfig::OscillatorAlt1 { .. }
            | FamilyConfig::OscillatorAlt3 { .. }
            | FamilyConfig::ExpCubic { .. } => true,
            FamilyConfig::PowerCosine { n, .. } => n == 1 || n == 3,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        fn finite(name: &'static str, v: f64) -> Result<(), FamilyError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} is not finite")))
            }
        }
        fn positive(name: &'static str, v: f64) -> Result<(), FamilyError> {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be > 0, got {v}")))
            }
        }
        fn nonzero(name: &'static str, v: f64) -> Result<(), FamilyError> {
            finite(name, v)?;
            if v != 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be nonzero"))
            }
        }
        fn time_only(name: &'static str, e: &Expr) -> Result<(), FamilyError> {
            for v in e.free_vars() {
                match v {
                    Var::T => {}
                    Var::Param(p) if p.as_ref() == "hbar" || p.as_ref() == "m" => {}
                    other => return Err(invalid(name, format!("may depend on t only, found `{}`", other.name()))),
                }
            }
            Ok(())
        }
        fn order(n: u32) -> Result<(), FamilyError> {
            if n >= 1 {
                Ok(())
            } else {
                Err(invalid("n", "must be an integer >= 1"))
            }
        }

        match self {
            FamilyConfig::PlaneWave { k } => finite("k", *k),
            FamilyConfig::NonSeparableFree {
                alpha,
                beta,
                gamma,
                t_i,
            } => {
                finite("alpha", *alpha)?;
                finite("beta", *beta)?;
                finite("gamma", *gamma)?;
                finite("t_i", *t_i)?;
                if *alpha < 0.0 || *beta < 0.0 || *alpha + *beta == 0.0 {
                    return Err(invalid("alpha", "alpha, beta must be >= 0 and not both zero"));
                }
                Ok(())
            }
            FamilyConfig::ExponentialFree { lambda, k } => {
                nonzero("lambda", *lambda)?;
                finite("k", *k)
            }
            FamilyConfig::AiryPacket { beta } => nonzero("beta", *beta),
            FamilyConfig::ScalingPacket { kind, alpha, beta } => {
                positive("alpha", *alpha)?;
                finite("beta", *beta)?;
                match kind {
                    ScalingKind::Gaussian { q } => nonzero("q", *q),
                    ScalingKind::Trig { zeta2 } => finite("zeta2", *zeta2),
                    ScalingKind::Weber { zeta1, zeta2, .. } => {
                        finite("zeta2", *zeta2)?;
                        positive("zeta1", *zeta1)
                            .map_err(|_| invalid("zeta1", "must be > 0; use the trig kind for zeta1 = 0"))
                    }
                }
            }
            FamilyConfig::OscillatorVvm { omega, alpha, t_i, x_i } => {
                positive("omega", *omega)?;
                positive("alpha", *alpha)?;
                finite("t_i", *t_i)?;
                finite("x_i", *x_i)
            }
            FamilyConfig::OscillatorAlt1 { omega, t_i } | FamilyConfig::OscillatorAlt3 { omega, t_i } => {
                positive("omega", *omega)?;
                finite("t_i", *t_i)
            }
            FamilyConfig::ExpCubic { a, b, c, mu } => {
                finite("a", *a)?;
                finite("b", *b)?;
                finite("c", *c)?;
                finite("mu", *mu)?;
                if *a == 0.0 && *b == 0.0 {
                    return Err(invalid("a", "a and b cannot both vanish"));
                }
                Ok(())
            }
            FamilyConfig::PowerCosine { n, omega, t_i } => {
                order(*n)?;
                positive("omega", *omega)?;
                finite("t_i", *t_i)
            }
            FamilyConfig::AiryForced { beta, zeta, .. } => {
                nonzero("beta", *beta)?;
                time_only("zeta", zeta)
            }
            FamilyConfig::WeberOscillator {
                beta,
                zeta0,
                table_half_width,
                ..
            } => {
                nonzero("beta", *beta)?;
                finite("zeta0", *zeta0)?;
                positive("table_half_width", *table_half_width)
            }
            FamilyConfig::GeneralPower {
                n,
                beta,
                zeta,
                table_half_width,
                ..
            } => {
                order(*n)?;
                nonzero("beta", *beta)?;
                time_only("zeta", zeta)?;
                positive("table_half_width", *table_half_width)
            }
        }
    }
}

/// Build the bundle of `cfg` with physical constants `consts`.
pub fn build(cfg: &FamilyConfig, consts: &PhysicalConstants) -> Result<SolutionBundle, FamilyError> {
    consts.validate()?;
    cfg.validate()?;
    let h = consts.hbar;
    let m = consts.mass;
    let x = Expr::x();
    let t = Expr::t();

    let parts = match cfg {
        FamilyConfig::PlaneWave { k } => {
            let mu = -(k * k / (2.0 * m)) * &t;
            Parts {
                f: Some(&x - (k / m) * &t),
                amplitude: Expr::one(),
                phase: k * &x + &mu,
                mu,
                potential: Expr::zero(),
                bohm_potential: Expr::zero(),
                exclusions: vec![],
            }
        }

        FamilyConfig::NonSeparableFree {
            alpha,
            beta,
            gamma,
            t_i,
        } => {
            let tau = &t - *t_i;
            let a = alpha.sqrt() * tau.pow(-1.5);
            let b = beta.sqrt() * tau.pow(-0.5);
            let f = cubic_f(&a, &b, &Expr::num(*gamma));
            let amplitude = &a * &x + &b;
            let phase = m * x.powi(2) / (2.0 * &tau);
            Parts {
                f: Some(f),
                amplitude: amplitude.clone(),
                phase,
                mu: Expr::zero(),
                potential: Expr::zero(),
                bohm_potential: Expr::zero(),
                exclusions: vec![
                    Exclusion::NonPositive { expr: tau.clone() },
                    Exclusion::AbsBelow {
                        expr: tau,
                        threshold: SINGULAR_THRESHOLD,
                    },
                    Exclusion::NonPositive { expr: amplitude },
                ],
            }
        }

        FamilyConfig::ExponentialFree { lambda, k } => {
            let exponent = lambda * &x - (h * lambda * k / m) * &t;
            let f = exponent.exp() / *lambda;
            let mu = -(h * h * k * k / (2.0 * m)) * (1.0 - lambda * lambda / (4.0 * k * k)) * &t;
            let amplitude = (exponent / 2.0).exp();
            let phase = h * k * &x + &mu;
            let vb = Expr::num(-h * h * lambda * lambda / (8.0 * m));
            Parts {
                f: Some(f),
                amplitude,
                phase,
                mu,
                potential: Expr::zero(),
                bohm_potential: vb,
                exclusions: vec![],
            }
        }

        FamilyConfig::AiryPacket { beta } => {
            let b3 = beta.powi(3);
            let shifted = &x - (b3 / (4.0 * m * m)) * t.powi(2);
            let amplitude = (beta / h.powf(2.0 / 3.0) * &shifted).airy_ai();
            let phase = (b3 / (2.0 * m)) * &t * (&x - (b3 / (6.0 * m * m)) * t.powi(2));
            let mu = -(b3 * b3 / (12.0 * m.powi(3))) * t.powi(3);
            let vb = -(b3 / (2.0 * m)) * &shifted;
            Parts::closed(amplitude, phase, mu, Expr::zero(), vb, consts, vec![])
        }

        FamilyConfig::ScalingPacket { kind, alpha, beta } => scaling_packet(kind, *alpha, *beta, consts)?,

        FamilyConfig::OscillatorVvm { omega, alpha, t_i, x_i } => {
            let phase_arg = omega * (&t - *t_i);
            let sin = phase_arg.sin();
            let tan = phase_arg.tan();
            let b = (*alpha / &sin).sqrt();
            let c = -(alpha * x_i) / &tan;
            let f = cubic_f(&Expr::zero(), &b, &c);
            let mu = m * omega * x_i * x_i / (2.0 * &tan);
            let phase = oscillator_vvm_phase(*omega, *t_i, &Expr::num(*x_i), m);
            Parts {
                f: Some(f),
                amplitude: b,
                phase,
                mu,
                potential: harmonic(m, *omega),
                bohm_potential: Expr::zero(),
                exclusions: singular_time(sin),
            }
        }

        FamilyConfig::OscillatorAlt1 { omega, t_i } | FamilyConfig::OscillatorAlt3 { omega, t_i } => {
            let phase_arg = omega * (&t - *t_i);
            let cos = phase_arg.cos();
            let (a, b) = if matches!(cfg, FamilyConfig::OscillatorAlt1 { .. }) {
                (Expr::zero(), cos.pow(-0.5))
            } else {
                (cos.pow(-1.5), Expr::zero())
            };
            let f = cubic_f(&a, &b, &Expr::zero());
            Parts {
                f: Some(f),
                amplitude: &a * &x + &b,
                phase: cosine_phase(*omega, *t_i, m),
                mu: Expr::zero(),
                potential: harmonic(m, *omega),
                bohm_potential: Expr::zero(),
                exclusions: singular_time(cos),
            }
        }

        FamilyConfig::ExpCubic { a, b, c, mu } => {
            let decay = (-mu * &t).exp();
            let f = cubic_f(&(*a * &decay), &(*b * &decay), &(*c * (-2.0 * mu * &t).exp()));
            let line = a * &x + *b;
            let poly = cubic_f(&Expr::num(*a), &Expr::num(*b), &Expr::num(*c));
            let phase = (2.0 * m * mu) * Expr::integral(Var::X, &poly / line.powi(2));
            let potential = -(2.0 * m * mu * mu) * poly.powi(2) / line.powi(4);
            Parts {
                f: Some(f),
                amplitude: decay * &line,
                phase,
                mu: Expr::zero(),
                potential,
                bohm_potential: Expr::zero(),
                exclusions: vec![Exclusion::NonPositive { expr: line }],
            }
        }

        FamilyConfig::PowerCosine { n, omega, t_i } => {
            let nf = f64::from(*n);
            let cos = (omega * (&t - *t_i)).cos();
            let f = x.powi(*n as i32) * cos.pow(-nf);
            let amplitude = (nf * x.powi(*n as i32 - 1)).sqrt() * cos.pow(-nf / 2.0);
            let coupling = h * h * (nf - 1.0) * (nf - 3.0) / (8.0 * m);
            let inverse_square = x.powi(-2);
            let mut exclusions = singular_time(cos);
            exclusions.push(Exclusion::AbsBelow {
                expr: x.clone(),
                threshold: SINGULAR_THRESHOLD,
            });
            if n % 2 == 0 {
                exclusions.push(Exclusion::NonPositive { expr: x.clone() });
            }
            Parts {
                f: Some(f),
                amplitude,
                phase: cosine_phase(*omega, *t_i, m),
                mu: Expr::zero(),
                potential: harmonic(m, *omega) + coupling * &inverse_square,
                bohm_potential: -coupling * inverse_square,
                exclusions,
            }
        }

        FamilyConfig::AiryForced { beta, zeta, sign } => {
            let zeta = zeta.bind(&consts.bindings());
            let profile = match sign {
                Sign::Plus => Profile::Airy(1.0),
                Sign::Minus => Profile::Airy(-1.0),
            };
            let s = sign.factor();
            let potential = (h.powf(2.0 / 3.0) * m / beta * zeta.dt().dt() + s * beta.powi(3) / (2.0 * m)) * &x;
            let mu_rate = -(h.powf(4.0 / 3.0) * m / (2.0 * beta * beta)) * zeta.dt().powi(2)
                + s * h.powf(2.0 / 3.0) * beta * beta / (2.0 * m) * &zeta;
            moving_profile(*beta, &zeta, profile, mu_rate, potential, 1, *sign, consts)
        }

        FamilyConfig::WeberOscillator {
            beta,
            zeta0,
            sign,
            parity,
            table_half_width,
        } => {
            let omega = weber_frequency(*beta, consts);
            let zeta = match sign {
                Sign::Plus => *zeta0 * (omega * &t).cos(),
                Sign::Minus => *zeta0 * (-omega * &t).exp(),
            };
            let s = sign.factor();
            let table = profile_table(2, *sign, *parity, *table_half_width)?;
            let potential = s * 0.5 * m * omega * omega * x.powi(2);
            let mu_rate = -(h / (2.0 * omega)) * zeta.dt().powi(2) + s * (h * omega / 2.0) * zeta.powi(2);
            moving_profile(
                *beta,
                &zeta,
                Profile::Table(table),
                mu_rate,
                potential,
                2,
                *sign,
                consts,
            )
        }

        FamilyConfig::GeneralPower {
            n,
            beta,
            zeta,
            sign,
            parity,
            table_half_width,
        } => {
            let zeta = zeta.bind(&consts.bindings());
            let s = sign.factor();
            let table = profile_table(*n, *sign, *parity, *table_half_width)?;
            let strength = h.powf(2.0 / 3.0) * beta * beta / (2.0 * m);
            let y = similarity_variable(*beta, &zeta, consts);
            let n_i = *n as i32;
            let potential =
                s * strength * (y.powi(n_i) - zeta.powi(n_i)) + (h.powf(2.0 / 3.0) * m / beta) * &x * zeta.dt().dt();
            let mu_rate =
                -(h.powf(4.0 / 3.0) * m / (2.0 * beta * beta)) * zeta.dt().powi(2) + s * strength * zeta.powi(n_i);
            moving_profile(
                *beta,
                &zeta,
                Profile::Table(table),
                mu_rate,
                potential,
                *n,
                *sign,
                consts,
            )
        }
    };

    Ok(SolutionBundle {
        family_id: cfg.id().to_string(),
        consts: *consts,
        f: parts.f,
        amplitude: parts.amplitude,
        phase: parts.phase,
        mu: parts.mu,
        potential: parts.potential,
        bohm_potential: parts.bohm_potential,
        vanishing_bohm: cfg.vanishing_bohm(),
        exclusions: parts.exclusions,
    })
}

/// Closed-form acceleration `-(V' + V_B')/m` of the packet, as a function of `t`.
pub fn declared_acceleration(cfg: &FamilyConfig, consts: &PhysicalConstants) -> Result<Expr, FamilyError> {
    consts.validate()?;
    cfg.validate()?;
    let (h, m) = (consts.hbar, consts.mass);
    match cfg {
        FamilyConfig::AiryPacket { beta } => Ok(Expr::num(beta.powi(3) / (2.0 * m * m))),
        FamilyConfig::AiryForced { beta, zeta, .. } | FamilyConfig::GeneralPower { beta, zeta, .. } => {
            let zeta = zeta.bind(&consts.bindings());
            Ok(-(h.powf(2.0 / 3.0) / beta) * zeta.dt().dt())
        }
        FamilyConfig::WeberOscillator { beta, zeta0, sign, .. } => {
            let omega = weber_frequency(*beta, consts);
            let t = Expr::t();
            let scale = zeta0 * beta.powi(3) / (m * m);
            Ok(match sign {
                Sign::Plus => scale * (omega * t).cos(),
                Sign::Minus => -scale * (-omega * t).exp(),
            })
        }
        other => Err(FamilyError::Unsupported(other.id().to_string())),
    }
}

/// Phase of the oscillator kernel family written with the initial position
/// as the free parameter `x_i`, for the Van Vleck-Morette comparison.
pub fn vvm_phase(cfg: &FamilyConfig, consts: &PhysicalConstants) -> Result<(Expr, f64), FamilyError> {
    cfg.validate()?;
    let m = consts.mass;
    match cfg {
        FamilyConfig::OscillatorVvm { omega, t_i, x_i, .. } => {
            Ok((oscillator_vvm_phase(*omega, *t_i, &Expr::param(VVM_INITIAL), m), *x_i))
        }
        FamilyConfig::OscillatorAlt1 { omega, t_i } | FamilyConfig::OscillatorAlt3 { omega, t_i } => {
            Ok((cosine_phase(*omega, *t_i, m), 0.0))
        }
        other => Err(FamilyError::Unsupported(other.id().to_string())),
    }
}

/// Name of the initial-position parameter in [`vvm_phase`].
pub const VVM_INITIAL: &str = "x_i";

struct Parts {
    f: Option<Expr>,
    amplitude: Expr,
    phase: Expr,
    mu: Expr,
    potential: Expr,
    bohm_potential: Expr,
    exclusions: Vec<Exclusion>,
}

impl Parts {
    /// Closed `A`, `S`; the generating function is reconstructed as
    /// `f = ∫_0^x A^2 + c(t)` with `ċ = -(A^2 S')(0, t) / m`.
    fn closed(
        amplitude: Expr,
        phase: Expr,
        mu: Expr,
        potential: Expr,
        bohm_potential: Expr,
        consts: &PhysicalConstants,
        exclusions: Vec<Exclusion>,
    ) -> Parts {
        let density = amplitude.powi(2);
        let flux_at_origin = (&density * phase.dx()).subst(&Var::X, &Expr::zero());
        let f = Expr::integral(Var::X, density) - Expr::integral(Var::T, flux_at_origin) / consts.mass;
        Parts {
            f: Some(f),
            amplitude,
            phase,
            mu,
            potential,
            bohm_potential,
            exclusions,
        }
    }
}

fn harmonic(m: f64, omega: f64) -> Expr {
    0.5 * m * omega * omega * Expr::x().powi(2)
}

fn singular_time(trig: Expr) -> Vec<Exclusion> {
    vec![
        Exclusion::NonPositive { expr: trig.clone() },
        Exclusion::AbsBelow {
            expr: trig,
            threshold: SINGULAR_THRESHOLD,
        },
    ]
}

/// `S = -(m omega x^2 / 2) tan(omega (t - t_i))`.
fn cosine_phase(omega: f64, t_i: f64, m: f64) -> Expr {
    let tan = (omega * (Expr::t() - t_i)).tan();
    -(0.5 * m * omega) * Expr::x().powi(2) * tan
}

/// `S = m omega (x^2 + x_i^2) / (2 tan) - m omega x x_i / sin`.
fn oscillator_vvm_phase(omega: f64, t_i: f64, x_i: &Expr, m: f64) -> Expr {
    let arg = omega * (Expr::t() - t_i);
    let x = Expr::x();
    (m * omega) * (x.powi(2) + x_i.powi(2)) / (2.0 * arg.tan()) - (m * omega) * &x * x_i / arg.sin()
}

/// `omega = beta^2 / (m hbar^{1/3})`.
fn weber_frequency(beta: f64, consts: &PhysicalConstants) -> f64 {
    beta * beta / (consts.mass * consts.hbar.powf(1.0 / 3.0))
}

/// `y = beta x / hbar^{2/3} + zeta(t)`.
fn similarity_variable(beta: f64, zeta: &Expr, consts: &PhysicalConstants) -> Expr {
    beta / consts.hbar.powf(2.0 / 3.0) * Expr::x() + zeta
}

fn profile_table(n: u32, sign: Sign, parity: Parity, half_width: f64) -> Result<Arc<OdeTable>, FamilyError> {
    let mut q = vec![0.0; n as usize + 1];
    q[n as usize] = sign.factor();
    Ok(Arc::new(OdeTable::solve(
        q,
        parity.initial(),
        (-half_width, half_width),
    )?))
}

enum Profile {
    /// `Ai(s y)`.
    Airy(f64),
    Table(Arc<OdeTable>),
}

/// `A = G(y)`, `y = beta x / hbar^{2/3} + zeta(t)`, `G'' = ± y^n G`;
/// `S = -(hbar^{2/3} m / beta) x ζ̇ + mu` with `mu = ∫_0^t mu_rate`.
#[allow(clippy::too_many_arguments)]
fn moving_profile(
    beta: f64,
    zeta: &Expr,
    profile: Profile,
    mu_rate: Expr,
    potential: Expr,
    n: u32,
    sign: Sign,
    consts: &PhysicalConstants,
) -> Parts {
    let (h, m) = (consts.hbar, consts.mass);
    let y = similarity_variable(beta, zeta, consts);
    let amplitude = match profile {
        Profile::Airy(s) => (s * &y).airy_ai(),
        Profile::Table(table) => Expr::ode_value(table, y.clone()),
    };
    let mu = Expr::integral(Var::T, mu_rate);
    let phase = -(h.powf(2.0 / 3.0) * m / beta) * Expr::x() * zeta.dt() + &mu;
    let bohm = -sign.factor() * (h.powf(2.0 / 3.0) * beta * beta / (2.0 * m)) * y.powi(n as i32);
    Parts::closed(amplitude, phase, mu, potential, bohm, consts, vec![])
}

fn scaling_packet(kind: &ScalingKind, alpha: f64, beta: f64, consts: &PhysicalConstants) -> Result<Parts, FamilyError> {
    let (h, m) = (consts.hbar, consts.mass);
    let (zeta1, zeta2) = kind.zetas();
    let t = Expr::t();
    let x = Expr::x();
    let shifted = &t + beta / (2.0 * alpha);
    let width_sq = alpha * shifted.powi(2) + h * h * zeta1 / (alpha * m * m);
    let width = width_sq.sqrt();
    let y = &x / &width;
    let profile = match kind {
        ScalingKind::Gaussian { q } => (-q * y.powi(2)).exp(),
        ScalingKind::Trig { zeta2 } if *zeta2 < 0.0 => ((-zeta2).sqrt() * &y).cos(),
        ScalingKind::Trig { zeta2 } if *zeta2 > 0.0 => (zeta2.sqrt() * &y).cosh(),
        ScalingKind::Trig { .. } => Expr::one(),
        ScalingKind::Weber { parity, .. } => {
            let table = OdeTable::solve(
                vec![zeta2, 0.0, zeta1],
                parity.initial(),
                (-DEFAULT_TABLE_HALF_WIDTH, DEFAULT_TABLE_HALF_WIDTH),
            )?;
            Expr::ode_value(Arc::new(table), y.clone())
        }
    };
    let mu = if zeta1 > 0.0 {
        let root = zeta1.sqrt();
        (h * zeta2 / (2.0 * root)) * ((m * alpha / (h * root)) * &shifted).atan()
    } else {
        -(h * h * zeta2 / (2.0 * m * alpha)) / &shifted
    };
    // σ̇/σ = (α u)/σ², u = t + β/2α.
    let phase = (m * alpha / 2.0) * &shifted / &width_sq * x.powi(2) + &mu;
    let amplitude = width.pow(-0.5) * profile;
    let bohm = -(h * h / (2.0 * m)) / &width_sq * (zeta1 * y.powi(2) + zeta2);
    let mut exclusions = vec![];
    if zeta1 == 0.0 {
        exclusions.push(Exclusion::AbsBelow {
            expr: shifted,
            threshold: SINGULAR_THRESHOLD,
        });
    }
    Ok(Parts::closed(
        amplitude,
        phase,
        mu,
        Expr::zero(),
        bohm,
        consts,
        exclusions,
    ))
}
