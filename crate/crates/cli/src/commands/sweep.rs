use bohmlab::families::{declared_acceleration, FamilyConfig};
use bohmlab::numerics::{bohmian_trajectory, fit_acceleration, Guidance};
use bohmlab::polar::{infer_potential, schrodinger_residual, PhysicalConstants};
use rayon::prelude::*;
use serde_json::{json, Value};

use clap::ValueEnum;

use crate::args::{Quantity, SweepArgs};
use crate::error::CliError;
use crate::output::{announce, Cell, Sink};
use crate::source::{config_from_json, resolve_json, set_param, Resolved};

const TRAJECTORY_SAMPLES: usize = 401;
/// Points where the phase velocity is read off.
const PHASE_PROBE: (f64, f64) = (0.5, 1.0);
/// Abscissae of the inverse-square fit, at `t = 0.3`.
const INVERSE_SQUARE_PROBES: [f64; 5] = [0.6, 0.8, 1.0, 1.2, 1.4];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_values(values: Option<&str>, range: Option<&str>) -> Result<Vec<f64>, CliError> {
    let list = |s: &str| -> Result<Vec<f64>, CliError> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("`{v}` is not a number")))
            })
            .collect()
    };
    match (values, range) {
        (Some(v), None) => list(v),
        (None, Some(r)) => {
            let p = list(r)?;
            if p.len() != 3 || p[2] < 1.0 || p[2].fract() != 0.0 {
                return Err(usage("--range expects start,stop,count"));
            }
            let n = p[2] as usize;
            if n == 1 {
                return Ok(vec![p[0]]);
            }
            Ok((0..n)
                .map(|k| p[0] + (p[1] - p[0]) * k as f64 / (n - 1) as f64)
                .collect())
        }
        _ => Err(usage("give exactly one of --values and --range")),
    }
}

/// Whole numbers go in as integers so integer parameters deserialize.
fn as_json(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

pub fn default_quantity(id: &str) -> Quantity {
    match id {
        "airy_packet" | "airy_forced" => Quantity::Acceleration,
        "exponential_free" => Quantity::PhaseVelocity,
        "power_cosine" => Quantity::InverseSquare,
        _ => Quantity::Residual,
    }
}

fn header(q: Quantity) -> [&'static str; 4] {
    match q {
        Quantity::Acceleration => [
            "fitted_acceleration",
            "declared_acceleration",
            "relative_error",
            "fit_rms",
        ],
        Quantity::PhaseVelocity => ["phase_velocity", "declared_phase_velocity", "relative_error", "t"],
        Quantity::InverseSquare => ["inverse_square", "declared_inverse_square", "abs_error", "spread"],
        Quantity::Residual => ["schrodinger_linf", "order", "excluded_fraction", "l2"],
    }
}

fn relative(measured: f64, declared: f64) -> f64 {
    if declared == 0.0 {
        measured.abs()
    } else {
        ((measured - declared) / declared).abs()
    }
}

/// The four derived numbers of one sweep point.
fn measure(q: Quantity, cfg: &FamilyConfig, resolved: &Resolved) -> Result<[f64; 4], CliError> {
    let consts: PhysicalConstants = resolved.consts;
    let (hbar, m) = (consts.hbar, consts.mass);
    let bundle = bohmlab::families::build(cfg, &consts)?;
    let spec = resolved.spec();
    let g = spec.grid;
    match q {
        Quantity::Acceleration => {
            let guide = Guidance::from_phase(&bundle.phase, m)?;
            let traj = bohmian_trajectory(
                |x, t| guide.velocity(x, t),
                0.0,
                (g.t_min, g.t_max),
                TRAJECTORY_SAMPLES,
                None,
            )?;
            let fit = fit_acceleration(&traj)?;
            let t_mid = 0.5 * (g.t_min + g.t_max);
            let declared = declared_acceleration(cfg, &consts)?.eval_xt(0.0, t_mid)?;
            Ok([
                fit.acceleration,
                declared,
                relative(fit.acceleration, declared),
                fit.residual,
            ])
        }
        Quantity::PhaseVelocity => {
            let FamilyConfig::ExponentialFree { lambda, k } = cfg else {
                return Err(usage("phase_velocity applies to exponential_free"));
            };
            let (x, t) = PHASE_PROBE;
            let rate = bundle.phase.dt().eval_xt(x, t)?;
            let slope = bundle.phase.dx().eval_xt(x, t)?;
            let measured = -rate / slope + 0.0;
            let declared = hbar * k / (2.0 * m) * (1.0 - lambda * lambda / (4.0 * k * k));
            Ok([measured, declared, relative(measured, declared), t])
        }
        Quantity::InverseSquare => {
            let FamilyConfig::PowerCosine { n, omega, .. } = cfg else {
                return Err(usage("inverse_square applies to power_cosine"));
            };
            let f = bundle.f.as_ref().expect("power_cosine is generated by f");
            let v = infer_potential(f, &bundle.mu, &consts).compile()?;
            let t = 0.3;
            let coeffs = INVERSE_SQUARE_PROBES
                .iter()
                .map(|&x| Ok(x * x * (v.eval(x, t)? - 0.5 * m * omega * omega * x * x)))
                .collect::<Result<Vec<f64>, CliError>>()?;
            let mean = coeffs.iter().sum::<f64>() / coeffs.len() as f64;
            let spread = coeffs.iter().map(|c| (c - mean).abs()).fold(0.0, f64::max);
            let n = *n as f64;
            let declared = hbar * hbar * (n - 1.0) * (n - 3.0) / (8.0 * m) + 0.0;
            Ok([mean, declared, (mean - declared).abs(), spread])
        }
        Quantity::Residual => {
            let r = schrodinger_residual(&bundle, &g, spec.fd_step)?;
            Ok([r.linf, r.order.unwrap_or(f64::NAN), r.excluded_fraction, r.l2])
        }
    }
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let (json, mut resolved) = resolve_json(&args.source)?;
    let json = json.ok_or_else(|| usage("sweep needs a builtin --family"))?;
    if let Some(g) = &args.grid {
        resolved.grid = Some(bohmlab::numerics::Grid::parse(g)?);
    }
    let values = parse_values(args.values.as_deref(), args.range.as_deref())?;
    let id = resolved.source.id().to_string();
    let quantity = args.quantity.unwrap_or_else(|| default_quantity(&id));

    let configs = values
        .iter()
        .map(|&v| {
            let mut point = json.clone();
            set_param(&mut point["params"], &args.param, as_json(v))?;
            config_from_json(point)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let measured = configs
        .par_iter()
        .map(|cfg| measure(quantity, cfg, &resolved))
        .collect::<Result<Vec<_>, CliError>>()?;

    let cols = header(quantity);
    let mut head = vec![args.param.as_str()];
    head.extend(cols);
    let rows: Vec<Vec<Cell>> = values
        .iter()
        .zip(&measured)
        .map(|(v, m)| {
            std::iter::once(Cell::Num(*v))
                .chain(m.iter().map(|x| Cell::Num(*x)))
                .collect()
        })
        .collect();
    println!("{}", head.join("\t"));
    for (v, m) in values.iter().zip(&measured) {
        println!("{v}\t{:.6e}\t{:.6e}\t{:.3e}\t{:.3e}", m[0], m[1], m[2], m[3]);
    }
    let meta = json!({
        "family": id,
        "param": args.param,
        "quantity": quantity.to_possible_value().map(|v| v.get_name().to_string()),
        "constants": resolved.consts,
        "base": json,
    });
    announce(&Sink::new(&args.output).table("sweep", &head, &rows, meta)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_values(None, Some("1,4,4")).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_values(Some("0.5, 2"), None).unwrap(), vec![0.5, 2.0]);
        assert!(parse_values(None, Some("1,2")).is_err());
        assert!(parse_values(None, None).is_err());
    }

    #[test]
    fn whole_numbers_become_integers() {
        assert_eq!(as_json(3.0), Value::from(3));
        assert_eq!(as_json(0.5), Value::from(0.5));
    }
}
