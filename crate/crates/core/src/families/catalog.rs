use serde::Serialize;

use super::{FamilyConfig, ScalingKind};
use crate::expr::parse;
use crate::numerics::Grid;
use crate::specfun::{Parity, Sign};

/// One row of the family catalog.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyDescriptor {
    pub id: &'static str,
    pub section: &'static str,
    pub title: &'static str,
    pub parameters: Vec<&'static str>,
    pub vanishing_bohm: bool,
    pub defaults: FamilyConfig,
}

/// Verification domain of a family: the sampling grid and the finite
/// difference step used for the residual stencils.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub grid: Grid,
    pub fd_step: f64,
}

fn time_expr(text: &str) -> crate::expr::Expr {
    parse(text).expect("builtin expression parses")
}

pub fn list_families() -> Vec<FamilyDescriptor> {
    let row = |section, title, parameters: &[&'static str], defaults: FamilyConfig| FamilyDescriptor {
        id: defaults.id(),
        section,
        title,
        parameters: parameters.to_vec(),
        vanishing_bohm: defaults.vanishing_bohm(),
        defaults,
    };
    vec![
        row("IV.A", "free plane wave", &["k"], FamilyConfig::PlaneWave { k: 1.0 }),
        row(
            "IV.B",
            "non-separable free packet",
            &["alpha", "beta", "gamma", "t_i"],
            FamilyConfig::NonSeparableFree {
                alpha: 1.0,
                beta: 1.0,
                gamma: 0.0,
                t_i: 0.0,
            },
        ),
        row(
            "V.A",
            "exponential free packet",
            &["lambda", "k"],
            FamilyConfig::ExponentialFree { lambda: 0.5, k: 1.0 },
        ),
        row(
            "V.B",
            "accelerating Airy packet",
            &["beta"],
            FamilyConfig::AiryPacket { beta: 1.0 },
        ),
        row(
            "V.C",
            "self-similar spreading packet",
            &["kind", "alpha", "beta"],
            FamilyConfig::ScalingPacket {
                kind: ScalingKind::Gaussian { q: 0.25 },
                alpha: 1.0,
                beta: 0.0,
            },
        ),
        row(
            "VI.A",
            "oscillator kernel",
            &["omega", "alpha", "t_i", "x_i"],
            FamilyConfig::OscillatorVvm {
                omega: 1.0,
                alpha: 1.0,
                t_i: 0.0,
                x_i: 0.5,
            },
        ),
        row(
            "VI.B",
            "oscillator, flat amplitude",
            &["omega", "t_i"],
            FamilyConfig::OscillatorAlt1 { omega: 1.0, t_i: 0.0 },
        ),
        row(
            "VI.C",
            "oscillator, linear amplitude",
            &["omega", "t_i"],
            FamilyConfig::OscillatorAlt3 { omega: 1.0, t_i: 0.0 },
        ),
        row(
            "VI.D",
            "exponential-cubic force family",
            &["a", "b", "c", "mu"],
            FamilyConfig::ExpCubic {
                a: 0.25,
                b: 1.0,
                c: 0.1,
                mu: 0.5,
            },
        ),
        row(
            "VII.A",
            "oscillator plus inverse square",
            &["n", "omega", "t_i"],
            FamilyConfig::PowerCosine {
                n: 2,
                omega: 1.0,
                t_i: 0.0,
            },
        ),
        row(
            "VII.B",
            "Airy packet in a uniform time-dependent field",
            &["beta", "zeta", "sign"],
            FamilyConfig::AiryForced {
                beta: 1.0,
                zeta: time_expr("t^2/4"),
                sign: Sign::Plus,
            },
        ),
        row(
            "VII.C",
            "Weber packet in an oscillator",
            &["beta", "zeta0", "sign", "parity", "table_half_width"],
            FamilyConfig::WeberOscillator {
                beta: 1.0,
                zeta0: 0.5,
                sign: Sign::Plus,
                parity: Parity::Even,
                table_half_width: super::DEFAULT_TABLE_HALF_WIDTH,
            },
        ),
        row(
            "VII.D",
            "polynomial potentials",
            &["n", "beta", "zeta", "sign", "parity", "table_half_width"],
            FamilyConfig::GeneralPower {
                n: 3,
                beta: 1.0,
                zeta: time_expr("0.5*cos(t)"),
                sign: Sign::Plus,
                parity: Parity::Even,
                table_half_width: super::DEFAULT_TABLE_HALF_WIDTH,
            },
        ),
    ]
}

/// Verification domain at the family's default parameters.
///
/// Each window keeps the local wavenumber and the amplitude of order one,
/// so that the closed-form stencil error stays below the residual tolerance.
pub fn default_grid(id: &str) -> Option<GridSpec> {
    let (x, t, fd_step) = match id {
        "plane_wave" => ((-8.0, 8.0), (0.1, 2.0), 2e-3),
        "non_separable_free" => ((-0.9, 1.5), (1.5, 3.0), 6e-4),
        "exponential_free" => ((-4.0, 4.0), (0.1, 2.0), 2e-3),
        "airy_packet" => ((-5.0, 5.0), (0.0, 2.0), 3e-4),
        "scaling_packet" => ((-4.0, 4.0), (0.0, 2.0), 4e-4),
        "oscillator_vvm" => ((-1.5, 1.5), (1.2, 1.9), 4e-4),
        "oscillator_alt1" => ((-1.5, 1.5), (0.0, 0.6), 4e-4),
        "oscillator_alt3" => ((-1.2, 1.2), (0.0, 0.6), 3e-4),
        "exp_cubic" => ((-1.0, 2.0), (0.0, 2.0), 1e-3),
        "power_cosine" => ((0.6, 1.4), (0.0, 0.6), 3e-4),
        "airy_forced" => ((-5.0, 5.0), (0.0, 2.0), 4e-4),
        "weber_oscillator" => ((-1.2, 1.2), (0.0, 3.0), 4e-4),
        "general_power" => ((-2.0, 1.0), (0.0, 3.0), 3e-4),
        _ => return None,
    };
    let grid = Grid::new(x, 512, t, 256).expect("builtin grid is valid");
    Some(GridSpec { grid, fd_step })
}
