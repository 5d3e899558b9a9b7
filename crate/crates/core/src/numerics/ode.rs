//! Classical RK4 with step-doubling error control.

use super::NumericsError;

#[derive(Clone, Copy, Debug)]
pub struct Rk4Options {
    /// Local error tolerance, mixed absolute/relative.
    pub tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Rk4Options {
            tol: 1e-9,
            initial_step: 1e-2,
            min_step: 1e-12,
        }
    }
}

fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), NumericsError>,
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4)?;
    Ok((0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Advance `y' = f(t, y)` from `t0` to `t1`, returning the state at `t1`.
///
/// `f` writes the derivative into its third argument. The step carried
/// between calls is written back to `step` so consecutive segments reuse it.
pub fn rk4_adaptive<F>(
    mut f: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    opts: &Rk4Options,
    step: &mut f64,
) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), NumericsError>,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = step.abs().max(opts.min_step) * dir;
    while dir * (t1 - t) > 0.0 {
        if dir * (t + h - t1) > 0.0 {
            h = t1 - t;
        }
        let full = rk4_step(&mut f, t, &y, h)?;
        let half = rk4_step(&mut f, t, &y, 0.5 * h)?;
        let two_halves = rk4_step(&mut f, t + 0.5 * h, &half, 0.5 * h)?;
        let err = full
            .iter()
            .zip(&two_halves)
            .map(|(a, b)| (a - b).abs() / 15.0 / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        if err <= opts.tol {
            t += h;
            // Richardson-extrapolated update.
            y = two_halves.iter().zip(&full).map(|(b, a)| b + (b - a) / 15.0).collect();
            if y.iter().any(|v| !v.is_finite()) {
                return Err(NumericsError::NonFinite { t });
            }
            *step = h.abs();
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (opts.tol / err).powf(0.2)).clamp(0.2, 4.0)
        };
        h *= factor;
        if h.abs() < opts.min_step && dir * (t1 - t) > opts.min_step {
            return Err(NumericsError::StepUnderflow { t });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut step = 0.1;
        let y = rk4_adaptive(
            |_, y, d| {
                d[0] = -y[0];
                Ok(())
            },
            &[1.0],
            0.0,
            3.0,
            &Rk4Options::default(),
            &mut step,
        )
        .unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn oscillator_energy_over_ten_periods() {
        let omega = 2.0;
        let period = 2.0 * std::f64::consts::PI / omega;
        let energy = |y: &[f64]| 0.5 * y[1] * y[1] + 0.5 * omega * omega * y[0] * y[0];
        let y0 = [1.0, 0.0];
        let mut step = 0.01;
        let y = rk4_adaptive(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -omega * omega * y[0];
                Ok(())
            },
            &y0,
            0.0,
            10.0 * period,
            &Rk4Options::default(),
            &mut step,
        )
        .unwrap();
        assert!((energy(&y) - energy(&y0)).abs() < 1e-7);
        assert!((y[0] - 1.0).abs() < 1e-6);
    }
}
