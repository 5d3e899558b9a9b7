//! Quadrature: cumulative Simpson integrals from the origin along a grid
//! line, and a fixed composite Gauss-Legendre rule used for integrals with a
//! variable upper limit inside expressions.

use std::sync::OnceLock;

use super::NumericsError;

const GL_NODES: usize = 16;
const GL_PANELS: usize = 4;

fn legendre_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_NODES;
        let mut rule = Vec::with_capacity(n);
        for k in 0..n {
            // Newton iteration from the Chebyshev-like initial guess.
            let mut z = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((z, 2.0 / ((1.0 - z * z) * dp * dp)));
        }
        rule
    })
}

/// `∫_0^upper g(s) ds` by composite Gauss-Legendre with a fixed number of
/// equal panels, so the result is a smooth function of `upper`.
pub fn gauss_legendre_0_to(upper: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    if upper == 0.0 {
        return 0.0;
    }
    let rule = legendre_rule();
    let width = upper / GL_PANELS as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..GL_PANELS {
        let mid = (p as f64 + 0.5) * width;
        let mut panel = 0.0;
        for &(z, w) in rule {
            panel += w * g(mid + half * z);
        }
        total += panel * half;
    }
    total
}

/// Cumulative integral `I(x_k) = ∫_0^{x_k} g` for samples `g` at
/// `x_k = x0 + k h`.
///
/// Node-to-node increments use Simpson panels (a three-point end correction
/// for odd intervals); the value at the origin, which need not be a node, is
/// removed with four-point interpolation. Errors are `O(h^4)`.
pub fn cumulative_from_zero(values: &[f64], x0: f64, h: f64) -> Result<Vec<f64>, NumericsError> {
    let n = values.len();
    if n < 4 {
        return Err(NumericsError::InvalidGrid("need at least 4 samples".into()));
    }
    let x_end = x0 + (n - 1) as f64 * h;
    if !(x0 <= 0.0 && x_end >= 0.0) {
        return Err(NumericsError::OriginOutside { lo: x0, hi: x_end });
    }
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = if k % 2 == 0 {
            cum[k - 2] + h / 3.0 * (values[k - 2] + 4.0 * values[k - 1] + values[k])
        } else if k == 1 {
            h / 12.0 * (5.0 * values[0] + 8.0 * values[1] - values[2])
        } else {
            cum[k - 1] + h / 12.0 * (-values[k - 2] + 8.0 * values[k - 1] + 5.0 * values[k])
        };
    }
    let s = -x0 / h;
    let base = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut at_origin = 0.0;
    for a in 0..4 {
        let mut l = 1.0;
        for b in 0..4 {
            if a != b {
                l *= (s - (base + b) as f64) / (a as f64 - b as f64);
            }
        }
        at_origin += l * cum[base + a];
    }
    Ok(cum.into_iter().map(|c| c - at_origin).collect())
}
