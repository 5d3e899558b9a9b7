//! Airy function `Ai` and its derivative for real arguments.
//!
//! `|y| <= 9` uses the Maclaurin series summed in double-double arithmetic,
//! so the cancellation between the two series for positive `y` costs no
//! accuracy. Beyond that the standard asymptotic expansions are used.

use std::f64::consts::{FRAC_PI_4, PI};

use super::dd::Dd;

/// Ai(0) = 3^(-2/3) / Γ(2/3).
const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
/// -Ai'(0) = 3^(-1/3) / Γ(1/3).
const NEG_AIP0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);

const SERIES_LIMIT: f64 = 9.0;
const UNDERFLOW: f64 = 200.0;

pub fn airy_ai(y: f64) -> f64 {
    airy(y).0
}

pub fn airy_ai_prime(y: f64) -> f64 {
    airy(y).1
}

/// `(Ai(y), Ai'(y))`.
pub fn airy(y: f64) -> (f64, f64) {
    if y.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if y > UNDERFLOW {
        return (0.0, 0.0);
    }
    if y.abs() <= SERIES_LIMIT {
        series(y)
    } else if y > 0.0 {
        asymptotic_decaying(y)
    } else {
        asymptotic_oscillating(-y)
    }
}

fn series(y: f64) -> (f64, f64) {
    let y3 = Dd::from_f64(y) * Dd::from_f64(y) * y;
    let tiny = 1e-33;

    let mut f = Dd::from_f64(1.0);
    let mut g = Dd::from_f64(y);
    let mut df = Dd::from_f64(0.0);
    let mut dg = Dd::from_f64(1.0);

    let mut tf = Dd::from_f64(1.0);
    let mut tg = Dd::from_f64(y);
    let mut tdf = Dd::from_f64(y * y / 2.0);
    let mut tdg = Dd::from_f64(1.0);
    df = df + tdf;

    for k in 0..400 {
        let k = k as f64;
        tf = tf * y3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg = tg * y3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        tdg = tdg * y3 / ((3.0 * k + 1.0) * (3.0 * k + 3.0));
        f = f + tf;
        g = g + tg;
        dg = dg + tdg;
        if k >= 1.0 {
            tdf = tdf * y3 / (3.0 * k * (3.0 * k + 2.0));
            df = df + tdf;
        }
        let scale = f.abs().hi + g.abs().hi + df.abs().hi + dg.abs().hi;
        let last = tf.abs().hi + tg.abs().hi + tdf.abs().hi + tdg.abs().hi;
        if k >= 1.0 && last <= tiny * scale {
            break;
        }
    }

    let ai = AI0 * f - NEG_AIP0 * g;
    let aip = AI0 * df - NEG_AIP0 * dg;
    (ai.to_f64(), aip.to_f64())
}

/// Coefficients `u_k` and `v_k` of the asymptotic expansions.
fn asymptotic_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Sum `Σ sign_k c_k z^{-k}` over `k = first, first + stride, ...`, stopping
/// at the smallest term.
fn optimal_sum(c: &[f64], zeta: f64, first: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = first;
    while k < c.len() {
        let term = c[k] * zeta.powi(-(k as i32));
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
        if alternate {
            sign = -sign;
        }
        k += if alternate { 2 } else { 1 };
    }
    sum
}

fn asymptotic_decaying(y: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients(40);
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let alt = |c: &[f64]| {
        let mut s = 0.0;
        let mut prev = f64::INFINITY;
        for (k, ck) in c.iter().enumerate() {
            let term = ck * zeta.powi(-(k as i32));
            if term.abs() > prev {
                break;
            }
            s += if k % 2 == 0 { term } else { -term };
            prev = term.abs();
            if term.abs() < 1e-17 * s.abs() {
                break;
            }
        }
        s
    };
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = y.powf(0.25);
    (e / q * alt(&u), -e * q * alt(&v))
}

fn asymptotic_oscillating(z: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients(40);
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let phase = zeta + FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let q = z.powf(0.25);
    let norm = 1.0 / PI.sqrt();

    let u_even = optimal_sum(&u, zeta, 0, true);
    let u_odd = optimal_sum(&u, zeta, 1, true);
    let v_even = optimal_sum(&v, zeta, 0, true);
    let v_odd = optimal_sum(&v, zeta, 1, true);

    let ai = norm / q * (s * u_even - c * u_odd);
    let aip = -norm * q * (c * v_even + s * v_odd);
    (ai, aip)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 50-digit evaluation.
    const TABLE: &[(f64, f64, f64)] = &[
        (-10.0, 0.04024123848644319, 0.99626504413279),
        (-9.0, -0.022133721547341403, -0.9756639809263316),
        (-5.0, 0.35076100902411433, 0.32719281855444315),
        (-4.5, 0.2921527810559595, -0.5233625323157477),
        (-1.0, 0.5355608832923521, -0.01016056711664521),
        (0.5, 0.23169360648083348, -0.2249105326646839),
        (2.0, 0.03492413042327438, -0.05309038443365363),
        (4.5, 0.00033025032351430896, -0.0007178665675575089),
        (9.0, 2.47116843087249e-09, -7.480641389658946e-09),
        (9.5, 5.330263704617492e-10, -1.6566394593740667e-09),
        (10.0, 1.1047532552898686e-10, -3.5206336767389237e-10),
        (15.0, 2.1649625207379925e-18, -8.420567954017772e-18),
    ];

    #[test]
    fn matches_reference_table() {
        for &(y, ai, aip) in TABLE {
            let (a, d) = airy(y);
            assert!(((a - ai) / ai).abs() < 1e-10, "Ai({y}) = {a}, want {ai}");
            assert!(((d - aip) / aip).abs() < 1e-10, "Ai'({y}) = {d}, want {aip}");
        }
    }

    #[test]
    fn values_at_origin() {
        assert!((airy_ai(0.0) - 0.355028053887817).abs() < 1e-15);
        assert!((airy_ai_prime(0.0) + 0.258819403792807).abs() < 1e-15);
    }

    #[test]
    fn methods_agree_across_the_switch() {
        for &y in &[8.5, 9.0, -8.5, -9.0] {
            let s = series(y);
            let a = if y > 0.0 {
                asymptotic_decaying(y)
            } else {
                asymptotic_oscillating(-y)
            };
            assert!(((s.0 - a.0) / s.0).abs() < 1e-9, "Ai at {y}: {s:?} vs {a:?}");
            assert!(((s.1 - a.1) / s.1).abs() < 1e-9, "Ai' at {y}: {s:?} vs {a:?}");
        }
    }

    #[test]
    fn satisfies_airy_equation() {
        let h = 1e-3;
        for &y in &[-6.0, -2.0, 0.3, 2.0, 5.0] {
            let d2 = (airy_ai(y + h) - 2.0 * airy_ai(y) + airy_ai(y - h)) / (h * h);
            assert!((d2 - y * airy_ai(y)).abs() < 1e-6 * (1.0 + airy_ai(y).abs()));
        }
        let h = 1e-4;
        let ratio = (airy_ai_prime(2.0 + h) - airy_ai_prime(2.0 - h)) / (2.0 * h) / airy_ai(2.0);
        assert!((ratio - 2.0).abs() < 1e-8);
    }

    #[test]
    fn underflows_far_right() {
        assert_eq!(airy(250.0), (0.0, 0.0));
        assert!(airy(-250.0).0.is_finite());
    }
}
