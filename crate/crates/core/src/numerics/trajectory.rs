//! Bohmian trajectories `x' = S'(x, t) / m` and quadratic acceleration fits.

use serde::{Deserialize, Serialize};

use super::ode::{rk4_adaptive, Rk4Options};
use super::NumericsError;
use crate::expr::{CompiledExpr, Expr};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

/// Guidance velocity `S'/m` compiled from a phase expression.
pub struct Guidance {
    slope: CompiledExpr,
    mass: f64,
}

impl Guidance {
    pub fn from_phase(phase: &Expr, mass: f64) -> Result<Self, NumericsError> {
        let slope = phase.dx().compile().map_err(|e| NumericsError::Domain(e.to_string()))?;
        Ok(Guidance { slope, mass })
    }

    pub fn velocity(&self, x: f64, t: f64) -> Result<f64, NumericsError> {
        self.slope
            .eval(x, t)
            .map(|p| p / self.mass)
            .map_err(|e| NumericsError::Domain(e.to_string()))
    }
}

/// Integrate a trajectory from `x0` at `t_span.0`, recording `samples`
/// equally spaced points. Leaving `x_bounds` is an error.
pub fn bohmian_trajectory(
    velocity: impl Fn(f64, f64) -> Result<f64, NumericsError>,
    x0: f64,
    t_span: (f64, f64),
    samples: usize,
    x_bounds: Option<(f64, f64)>,
) -> Result<Trajectory, NumericsError> {
    if samples < 2 || !(t_span.1 > t_span.0) {
        return Err(NumericsError::InvalidGrid(
            "trajectory needs at least 2 samples over an increasing time span".into(),
        ));
    }
    let opts = Rk4Options::default();
    let dt = (t_span.1 - t_span.0) / (samples - 1) as f64;
    let mut times = Vec::with_capacity(samples);
    let mut positions = Vec::with_capacity(samples);
    let mut velocities = Vec::with_capacity(samples);
    let mut x = x0;
    let mut step = dt.min(1e-2);
    for k in 0..samples {
        let t = t_span.0 + k as f64 * dt;
        if k > 0 {
            let prev = t - dt;
            let y = rk4_adaptive(
                |s, y, d| {
                    d[0] = velocity(y[0], s)?;
                    Ok(())
                },
                &[x],
                prev,
                t,
                &opts,
                &mut step,
            )?;
            x = y[0];
        }
        if let Some((lo, hi)) = x_bounds {
            if x < lo || x > hi {
                return Err(NumericsError::ExitedGrid { t, x });
            }
        }
        times.push(t);
        positions.push(x);
        velocities.push(velocity(x, t)?);
    }
    Ok(Trajectory {
        times,
        positions,
        velocities,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccelerationFit {
    pub acceleration: f64,
    /// Root-mean-square deviation of the positions from the fitted parabola.
    pub residual: f64,
}

/// Least-squares parabola through the positions; the acceleration is twice
/// the quadratic coefficient.
pub fn fit_acceleration(traj: &Trajectory) -> Result<AccelerationFit, NumericsError> {
    let n = traj.times.len();
    if n < 16 {
        return Err(NumericsError::TooFewSamples(n));
    }
    let first = traj.positions[0];
    if traj.positions.iter().all(|p| *p == first) {
        return Ok(AccelerationFit {
            acceleration: 0.0,
            residual: 0.0,
        });
    }
    // Centre and scale time for conditioning.
    let t_mid = 0.5 * (traj.times[0] + traj.times[n - 1]);
    let t_half = 0.5 * (traj.times[n - 1] - traj.times[0]);
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (t, x) in traj.times.iter().zip(&traj.positions) {
        let s = (t - t_mid) / t_half;
        let basis = [1.0, s, s * s];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += basis[a] * basis[b];
            }
            r[a] += basis[a] * x;
        }
    }
    let c = solve3(m, r).ok_or(NumericsError::Domain("singular fit".into()))?;
    let rms = (traj
        .times
        .iter()
        .zip(&traj.positions)
        .map(|(t, x)| {
            let s = (t - t_mid) / t_half;
            (c[0] + c[1] * s + c[2] * s * s - x).powi(2)
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(AccelerationFit {
        acceleration: 2.0 * c[2] / (t_half * t_half),
        residual: rms,
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|a, b| m[*a][col].abs().total_cmp(&m[*b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        r.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = r[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exact_parabola() {
        let times: Vec<f64> = (0..32).map(|k| k as f64 / 16.0).collect();
        let traj = Trajectory {
            positions: times.iter().map(|t| t * t / 4.0).collect(),
            velocities: times.iter().map(|t| t / 2.0).collect(),
            times,
        };
        let fit = fit_acceleration(&traj).unwrap();
        assert!((fit.acceleration - 0.5).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn straight_line_and_constant() {
        let traj = bohmian_trajectory(|_, _| Ok(1.0), 0.5, (0.0, 2.0), 33, None).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.positions) {
            assert!((x - 0.5 - t).abs() < 1e-12);
        }
        assert!(fit_acceleration(&traj).unwrap().acceleration.abs() < 1e-10);

        let still = bohmian_trajectory(|_, _| Ok(0.0), 1.0, (0.0, 1.0), 20, None).unwrap();
        assert_eq!(fit_acceleration(&still).unwrap().acceleration, 0.0);
    }

    #[test]
    fn leaving_the_window_is_an_error() {
        let r = bohmian_trajectory(|_, _| Ok(10.0), 0.0, (0.0, 1.0), 20, Some((-1.0, 1.0)));
        assert!(matches!(r, Err(NumericsError::ExitedGrid { .. })));
        let traj = bohmian_trajectory(|_, _| Ok(1.0), 0.0, (0.0, 1.0), 8, None).unwrap();
        assert!(matches!(fit_acceleration(&traj), Err(NumericsError::TooFewSamples(8))));
    }
}
