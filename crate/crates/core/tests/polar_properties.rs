use bohmlab::expr::Expr;
use bohmlab::numerics::{cumulative_from_zero, Grid};
use bohmlab::polar::{
    bohm_kernel, bohm_potential, bundle_from_f, continuity_residual, cubic_f, infer_force, infer_potential,
    qhje_residual, vanishing_bohm_residual, PhysicalConstants,
};
use proptest::prelude::*;

fn sample() -> Vec<(f64, f64)> {
    (0..24)
        .map(|k| {
            let u = (k as f64 * 0.618_033_988_75).fract();
            let v = (k as f64 * 0.754_877_666_25 + 0.3).fract();
            (-1.5 + 3.0 * u, 0.1 + 1.9 * v)
        })
        .collect()
}

fn consts() -> impl Strategy<Value = PhysicalConstants> {
    (0.3f64..2.0, 0.3f64..3.0).prop_map(|(h, m)| PhysicalConstants::new(h, m).unwrap())
}

/// Cubic generator with coefficients that move in time; `a x + b` stays
/// above 0.3 on the sample box, away from the singular zeros of `f'`.
fn moving_cubic() -> impl Strategy<Value = Expr> {
    (0.2f64..0.6, -0.1f64..0.1, 2.0f64..3.0, -0.5f64..0.5, -1.0f64..1.0).prop_map(|(a0, a1, b0, b1, c0)| {
        let t = Expr::t();
        let a = a0 + a1 * &t;
        let b = b0 + b1 * t.sin();
        let c = c0 * t.powi(2);
        cubic_f(&a, &b, &c)
    })
}

/// `x + eps sin(k x + w t)` with `f' > 0` everywhere.
fn rippled() -> impl Strategy<Value = Expr> {
    (0.05f64..0.8, 0.5f64..2.0, -2.0f64..2.0).prop_map(|(slope, k, w)| {
        let eps = slope / k;
        Expr::x() + eps * (k * Expr::x() + w * Expr::t()).sin()
    })
}

fn gauge() -> impl Strategy<Value = Expr> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.5f64..3.0)
        .prop_map(|(d0, d1, w)| d0 * Expr::t().powi(2) + d1 * (w * Expr::t()).sin())
}

fn small_grid() -> Grid {
    Grid::new((-1.5, 1.5), 24, (0.1, 1.5), 10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_bundles_conserve_probability(f in prop_oneof![moving_cubic(), rippled()], mu in gauge(), c in consts()) {
        let bundle = bundle_from_f("prop", &f, &mu, &c).unwrap();
        let g = small_grid();
        let r = continuity_residual(&bundle, &g).unwrap();
        prop_assert!(r.linf <= 1e-8, "continuity {} for {f}", r.linf);
        let q = qhje_residual(&bundle, &g).unwrap();
        let scale = bundle.potential.eval_xt(0.3, 0.7).unwrap().abs().max(1.0);
        prop_assert!(q.linf <= 1e-8 * scale, "qhje {} for {f}", q.linf);
    }

    #[test]
    fn cubic_generators_have_no_bohm_potential(f in moving_cubic(), c in consts()) {
        let pts: Vec<_> = sample()
            .into_iter()
            .filter(|&(x, t)| f.dx().eval_xt(x, t).unwrap() > 1e-3)
            .collect();
        prop_assert!(vanishing_bohm_residual(&f, &pts).unwrap() <= 1e-8);
        let vb = bohm_potential(&f.dx().sqrt(), &c);
        for (x, t) in pts {
            prop_assert!(vb.eval_xt(x, t).unwrap().abs() <= 1e-8);
        }
    }

    #[test]
    fn bohm_potential_is_the_kernel_up_to_a_constant(f in rippled(), c in consts()) {
        let vb = bohm_potential(&f.dx().sqrt(), &c);
        let w = bohm_kernel(&f);
        let factor = -c.hbar * c.hbar / (4.0 * c.mass);
        let residual = vanishing_bohm_residual(&f, &sample()).unwrap();
        prop_assert!(residual > 1e-6);
        for (x, t) in sample() {
            let lhs = vb.eval_xt(x, t).unwrap();
            let rhs = factor * w.eval_xt(x, t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn gauge_shift_moves_the_potential_uniformly(f in rippled(), mu in gauge(), delta in gauge(), c in consts()) {
        let v0 = infer_potential(&f, &mu, &c).compile().unwrap();
        let v1 = infer_potential(&f, &(&mu + &delta), &c).compile().unwrap();
        let rate = delta.dt();
        for (x, t) in sample() {
            let shift = v1.eval(x, t).unwrap() - v0.eval(x, t).unwrap();
            let expected = -rate.eval_xt(x, t).unwrap();
            prop_assert!((shift - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{shift} vs {expected}");
        }
    }

    #[test]
    fn force_is_minus_the_potential_slope(f in prop_oneof![moving_cubic(), rippled()], mu in gauge(), c in consts()) {
        let v = infer_potential(&f, &mu, &c).compile().unwrap();
        let force = infer_force(&f, &c);
        let h = 1e-3;
        for (x, t) in sample() {
            if f.dx().eval_xt(x, t).unwrap() < 0.05 {
                continue;
            }
            let at = |s: f64| v.eval(x + s, t).unwrap();
            let slope = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
            let exact = force.eval_xt(x, t).unwrap();
            prop_assert!((exact + slope).abs() <= 1e-6 * exact.abs().max(1.0), "{exact} vs {}", -slope);
        }
    }

    #[test]
    fn cumulative_quadrature_converges_at_fourth_order(k in 0.5f64..3.0, x0 in -2.0f64..-0.3, n in 40usize..80) {
        let err = |n: usize| {
            let h = (2.0 - x0) / (n - 1) as f64;
            let g: Vec<f64> = (0..n).map(|i| (k * (x0 + i as f64 * h)).cos()).collect();
            let cum = cumulative_from_zero(&g, x0, h).unwrap();
            cum.iter()
                .enumerate()
                .map(|(i, c)| (c - (k * (x0 + i as f64 * h)).sin() / k).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(n), err(2 * n - 1));
        let order = (coarse / fine).log2();
        prop_assert!(fine < 1e-5 && order > 3.3, "errors {coarse:e} {fine:e} order {order}");
    }
}
