//! Residuals of the Schrödinger, continuity and quantum Hamilton-Jacobi
//! equations for a [`SolutionBundle`], and the Bohm-potential cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bohm_potential, ExclusionMask, PolarError, SolutionBundle};
use crate::expr::{CompiledExpr, Expr};
use crate::numerics::{fd_derivative, Axis, Field, Grid};

/// Amplitudes below this fraction of the largest sampled `|A|` are skipped
/// by checks that divide by `A`.
const AMPLITUDE_FLOOR: f64 = 1e-8;

/// Norms of a residual over the included nodes of a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub linf: f64,
    /// `sqrt(dx dt Σ |R|^2)` over included nodes.
    pub l2: f64,
    /// Observed convergence order from one refinement, when one was run.
    pub order: Option<f64>,
    pub excluded_fraction: f64,
    #[serde(skip)]
    pub grid: Option<Grid>,
}

impl ResidualReport {
    pub fn from_samples(grid: &Grid, samples: &[Option<f64>]) -> Self {
        let mut linf: f64 = 0.0;
        let mut sum = 0.0;
        let mut excluded = 0usize;
        for s in samples {
            match s {
                Some(r) => {
                    linf = linf.max(r.abs());
                    sum += r * r;
                }
                None => excluded += 1,
            }
        }
        ResidualReport {
            linf,
            l2: (grid.dx() * grid.dt() * sum).sqrt(),
            order: None,
            excluded_fraction: excluded as f64 / samples.len().max(1) as f64,
            grid: Some(*grid),
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.linf <= tol && self.linf.is_finite()
    }
}

fn sample_grid(grid: &Grid, f: impl Fn(f64, f64) -> Option<f64> + Sync) -> Vec<Option<f64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % grid.nx, k / grid.nx);
            f(grid.x(i), grid.t(j)).filter(|v| v.is_finite())
        })
        .collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

struct Compiled {
    amplitude: CompiledExpr,
    phase: CompiledExpr,
    mask: ExclusionMask,
}

impl Compiled {
    fn new(bundle: &SolutionBundle) -> Result<Self, PolarError> {
        Ok(Compiled {
            amplitude: bundle.amplitude.compile()?,
            phase: bundle.phase.compile()?,
            mask: bundle.exclusion_mask()?,
        })
    }

    fn psi(&self, x: f64, t: f64, hbar: f64) -> Option<(f64, f64)> {
        let a = finite(self.amplitude.eval_raw(x, t))?;
        let s = finite(self.phase.eval_raw(x, t))?;
        let (sin, cos) = (s / hbar).sin_cos();
        Some((a * cos, a * sin))
    }

    fn max_amplitude(&self, grid: &Grid) -> f64 {
        sample_grid(grid, |x, t| {
            if self.mask.excludes(x, t) {
                None
            } else {
                Some(self.amplitude.eval_raw(x, t).abs())
            }
        })
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

/// `|-(hbar^2/2m) psi_xx + V psi - i hbar psi_t|` with central differences of
/// step `fd_step` around every grid node, using the closed-form `psi` and the
/// declared potential. The order comes from repeating with `fd_step / 2`.
pub fn schrodinger_residual(bundle: &SolutionBundle, grid: &Grid, fd_step: f64) -> Result<ResidualReport, PolarError> {
    let c = Compiled::new(bundle)?;
    let potential = bundle.potential.compile()?;
    let (hbar, m) = (bundle.consts.hbar, bundle.consts.mass);

    let at = |h: f64| {
        sample_grid(grid, |x, t| {
            if c.mask.excludes(x, t) {
                return None;
            }
            let p = c.psi(x, t, hbar)?;
            let xp = c.psi(x + h, t, hbar)?;
            let xm = c.psi(x - h, t, hbar)?;
            let tp = c.psi(x, t + h, hbar)?;
            let tm = c.psi(x, t - h, hbar)?;
            let v = finite(potential.eval_raw(x, t))?;
            let lap = |k: usize| {
                let pick = |z: (f64, f64)| if k == 0 { z.0 } else { z.1 };
                (pick(xp) - 2.0 * pick(p) + pick(xm)) / (h * h)
            };
            let rate = |k: usize| {
                let pick = |z: (f64, f64)| if k == 0 { z.0 } else { z.1 };
                (pick(tp) - pick(tm)) / (2.0 * h)
            };
            let kin = -hbar * hbar / (2.0 * m);
            // -i hbar (u + i w) = hbar w - i hbar u
            let re = kin * lap(0) + v * p.0 + hbar * rate(1);
            let im = kin * lap(1) + v * p.1 - hbar * rate(0);
            Some(re.hypot(im))
        })
    };
    let coarse = at(fd_step);
    let fine = at(0.5 * fd_step);
    let mut report = ResidualReport::from_samples(grid, &coarse);
    let fine_report = ResidualReport::from_samples(grid, &fine);
    report.order = observed_order(report.linf, fine_report.linf);
    Ok(report)
}

fn observed_order(coarse: f64, fine: f64) -> Option<f64> {
    if coarse > 0.0 && fine > 0.0 {
        Some((coarse / fine).log2())
    } else {
        None
    }
}

/// `(1/m)(A^2 S')' + ∂_t(A^2)` from exact symbolic derivatives.
pub fn continuity_expr(bundle: &SolutionBundle) -> Expr {
    let density = bundle.amplitude.powi(2);
    (&density * bundle.phase.dx()).dx() / bundle.consts.mass + density.dt()
}

/// Continuity residual evaluated from symbolic derivatives at every node.
pub fn continuity_residual(bundle: &SolutionBundle, grid: &Grid) -> Result<ResidualReport, PolarError> {
    let r = continuity_expr(bundle).compile()?;
    let mask = bundle.exclusion_mask()?;
    let samples = sample_grid(grid, |x, t| {
        if mask.excludes(x, t) {
            None
        } else {
            Some(r.eval_raw(x, t))
        }
    });
    Ok(ResidualReport::from_samples(grid, &samples))
}

/// Continuity residual from second-order differences of tabulated `A^2` and
/// `S` on the grid itself, with the order from one refinement.
pub fn continuity_residual_numeric(bundle: &SolutionBundle, grid: &Grid) -> Result<ResidualReport, PolarError> {
    let c = Compiled::new(bundle)?;
    let m = bundle.consts.mass;
    let on = |g: &Grid| -> Result<Field, PolarError> {
        let density = Field::tabulate(*g, |x, t| {
            if c.mask.excludes(x, t) {
                Err(())
            } else {
                Ok(c.amplitude.eval_raw(x, t).powi(2))
            }
        });
        let phase = Field::tabulate(*g, |x, t| {
            if c.mask.excludes(x, t) {
                Err(())
            } else {
                Ok(c.phase.eval_raw(x, t))
            }
        });
        let mut flux = fd_derivative(&phase, Axis::X, 1)?;
        for k in 0..flux.values.len() {
            flux.values[k] *= density.values[k] / m;
            flux.excluded[k] |= density.excluded[k];
        }
        let mut div = fd_derivative(&flux, Axis::X, 1)?;
        // Differencing the one-sided boundary flux again is only first
        // order, so the two outermost columns are not reported.
        for j in 0..g.nt {
            for i in [0, 1, g.nx - 2, g.nx - 1] {
                div.excluded[g.index(i, j)] = true;
            }
        }
        let rate = fd_derivative(&density, Axis::T, 1)?;
        let mut out = div;
        for k in 0..out.values.len() {
            out.values[k] += rate.values[k];
            out.excluded[k] |= rate.excluded[k];
        }
        Ok(out)
    };
    let coarse = on(grid)?;
    let fine_grid = grid.refined();
    let fine = on(&fine_grid)?;
    // Compare on the coarse nodes, which are every other fine node.
    let pick = |f: &Field, stride: usize| -> Vec<Option<f64>> {
        let g = &f.grid;
        let mut out = Vec::with_capacity(grid.len());
        for j in 0..grid.nt {
            for i in 0..grid.nx {
                let k = g.index(i * stride, j * stride);
                out.push((!f.excluded[k]).then_some(f.values[k]));
            }
        }
        out
    };
    let cs = pick(&coarse, 1);
    let fs = pick(&fine, 2);
    let both = |a: &[Option<f64>], b: &[Option<f64>]| -> Vec<Option<f64>> {
        a.iter().zip(b).map(|(x, y)| y.and(*x)).collect()
    };
    let mut report = ResidualReport::from_samples(grid, &both(&cs, &fs));
    let fine_report = ResidualReport::from_samples(grid, &both(&fs, &cs));
    report.order = observed_order(report.linf, fine_report.linf);
    Ok(report)
}

/// `S'^2/(2m) - hbar^2 A''/(2mA) + V + Ṡ` with the declared potential.
pub fn qhje_expr(bundle: &SolutionBundle) -> Expr {
    let m = bundle.consts.mass;
    bundle.phase.dx().powi(2) / (2.0 * m)
        + bohm_potential(&bundle.amplitude, &bundle.consts)
        + &bundle.potential
        + bundle.phase.dt()
}

fn amplitude_weighted_check(
    bundle: &SolutionBundle,
    grid: &Grid,
    residual: &Expr,
) -> Result<ResidualReport, PolarError> {
    let c = Compiled::new(bundle)?;
    let r = residual.compile()?;
    let floor = AMPLITUDE_FLOOR * c.max_amplitude(grid);
    let samples = sample_grid(grid, |x, t| {
        if c.mask.excludes(x, t) || c.amplitude.eval_raw(x, t).abs() <= floor {
            None
        } else {
            Some(r.eval_raw(x, t))
        }
    });
    Ok(ResidualReport::from_samples(grid, &samples))
}

/// Quantum Hamilton-Jacobi residual from symbolic derivatives; nodes where
/// the amplitude nearly vanishes are excluded.
pub fn qhje_residual(bundle: &SolutionBundle, grid: &Grid) -> Result<ResidualReport, PolarError> {
    amplitude_weighted_check(bundle, grid, &qhje_expr(bundle))
}

/// `|V_B(A) - V_B declared|` on the grid.
pub fn bohm_consistency(bundle: &SolutionBundle, grid: &Grid) -> Result<ResidualReport, PolarError> {
    let diff = bohm_potential(&bundle.amplitude, &bundle.consts) - &bundle.bohm_potential;
    amplitude_weighted_check(bundle, grid, &diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::polar::{bundle_from_f, PhysicalConstants};

    fn plane_wave() -> SolutionBundle {
        let c = PhysicalConstants::default();
        SolutionBundle {
            family_id: "test".into(),
            consts: c,
            f: None,
            amplitude: Expr::one(),
            phase: parse("x - t/2").unwrap(),
            mu: parse("-t/2").unwrap(),
            potential: Expr::zero(),
            bohm_potential: Expr::zero(),
            vanishing_bohm: true,
            exclusions: vec![],
        }
    }

    fn grid() -> Grid {
        Grid::new((-2.0, 2.0), 33, (0.0, 1.0), 17).unwrap()
    }

    #[test]
    fn constant_wavefunction_has_zero_residual() {
        let mut b = plane_wave();
        b.phase = Expr::zero();
        let r = schrodinger_residual(&b, &grid(), 1e-2).unwrap();
        assert_eq!(r.linf, 0.0);
        assert_eq!(r.order, None);
    }

    #[test]
    fn plane_wave_converges_at_second_order() {
        let r = schrodinger_residual(&plane_wave(), &grid(), 1e-2).unwrap();
        assert!(r.linf < 1e-5);
        let p = r.order.unwrap();
        assert!((p - 2.0).abs() < 0.3, "order {p}");
    }

    #[test]
    fn plane_wave_identities() {
        let b = plane_wave();
        assert_eq!(continuity_residual(&b, &grid()).unwrap().linf, 0.0);
        assert_eq!(qhje_residual(&b, &grid()).unwrap().linf, 0.0);
        let bad = b.with_phase(parse("x - t/2 + 0.01*x^2").unwrap());
        assert!(continuity_residual(&bad, &grid()).unwrap().linf > 1e-3);
    }

    #[test]
    fn f_bundles_satisfy_continuity_identically() {
        let c = PhysicalConstants::new(0.8, 1.7).unwrap();
        let f = parse("x + x^3/3 + t*x^2/2 + sin(t)*x").unwrap();
        let b = bundle_from_f("f", &f, &parse("t").unwrap(), &c).unwrap();
        let g = Grid::new((-0.5, 0.5), 21, (0.0, 0.5), 11).unwrap();
        let r = continuity_residual(&b, &g).unwrap();
        assert!(r.linf < 1e-10, "{r:?}");
        assert!(qhje_residual(&b, &g).unwrap().linf < 1e-10);
        let n = continuity_residual_numeric(&b, &g).unwrap();
        assert!((n.order.unwrap() - 2.0).abs() < 0.3, "{n:?}");
    }

    #[test]
    fn report_serializes_with_fixed_names() {
        let r = ResidualReport::from_samples(&grid(), &vec![Some(1.0); grid().len()]);
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["excluded_fraction", "l2", "linf", "order"]);
    }
}
