//! Split-step Fourier evolution of the Schrödinger equation on a periodic
//! grid, and comparison of the evolved state with a closed-form bundle.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use thiserror::Error;

use crate::polar::{PhysicalConstants, PolarError, SolutionBundle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("state has {got} points, grid has {want}")]
    ShapeMismatch { got: usize, want: usize },
    #[error("non-finite value after step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("potential is not finite at x = {x}, t = {t}")]
    BadPotential { x: f64, t: f64 },
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// Periodic grid `x_j = x_min + j dx`, `dx = (x_max - x_min) / nx`, with
/// time step and optional absorbing band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropagationSetup {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
    /// Width in cells of the cosine-taper absorber at each edge; 0 disables it.
    pub absorber_cells: usize,
    pub consts: PhysicalConstants,
}

impl PropagationSetup {
    pub fn new(
        x: (f64, f64),
        nx: usize,
        dt: f64,
        absorber_cells: usize,
        consts: PhysicalConstants,
    ) -> Result<Self, PropagateError> {
        let s = PropagationSetup {
            x_min: x.0,
            x_max: x.1,
            nx,
            dt,
            absorber_cells,
            consts,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), PropagateError> {
        let bad = |m: String| Err(PropagateError::InvalidSetup(m));
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return bad("x range must be finite and increasing".into());
        }
        if self.nx < 16 || !self.nx.is_power_of_two() {
            return bad(format!("nx must be a power of two >= 16, got {}", self.nx));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if 4 * self.absorber_cells >= self.nx {
            return bad(format!(
                "absorber width {} must be below nx/4 = {}",
                self.absorber_cells,
                self.nx / 4
            ));
        }
        self.consts.validate()?;
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|j| self.x_min + j as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.nx;
        let scale = 2.0 * std::f64::consts::PI / (self.x_max - self.x_min);
        (0..n)
            .map(|j| {
                let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                signed * scale
            })
            .collect()
    }
}

/// `cos(pi s / 2)^(1/8)` over the outer `cells` points at each edge, `s` the
/// normalized depth into the band; 1 elsewhere.
pub fn cosine_taper(nx: usize, cells: usize) -> Vec<f64> {
    let mut w = vec![1.0; nx];
    for k in 0..cells {
        let s = (cells - k) as f64 / cells as f64;
        let v = (0.5 * std::f64::consts::PI * s).cos().max(0.0).powf(0.125);
        w[k] = v;
        w[nx - 1 - k] = v;
    }
    w
}

/// Smooth ramp from 0 to 1 over the outer `cells` points at each edge, used
/// to window non-normalizable initial states. The ramp is the C-infinity
/// step `1 / (1 + exp(1/s - 1/(1-s)))`, whose spectrum decays faster than
/// any power, so the window adds no long-range ripple.
pub fn edge_window(nx: usize, cells: usize) -> Vec<f64> {
    let mut w = vec![1.0; nx];
    let cells = cells.min(nx / 2);
    for k in 0..cells {
        let s = k as f64 / cells as f64;
        let v = if s <= 0.0 {
            0.0
        } else {
            1.0 / (1.0 + (1.0 / s - 1.0 / (1.0 - s)).exp())
        };
        w[k] = v;
        w[nx - 1 - k] = v;
    }
    w
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub psi: Vec<Complex64>,
}

/// Result of [`split_step`]: the initial state followed by one snapshot per
/// requested time.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub setup: PropagationSetup,
    pub xs: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// `||psi||` at each snapshot.
    pub norms: Vec<f64>,
    /// Largest change of `||psi||` over a single step.
    pub max_step_norm_drift: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

pub fn l2_norm(psi: &[Complex64], dx: f64) -> f64 {
    (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

struct Stepper {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    kinetic_dt: f64,
    k2: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Stepper {
    fn new(setup: &PropagationSetup) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(setup.nx);
        let inverse = planner.plan_fft_inverse(setup.nx);
        let scratch =
            vec![Complex64::default(); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        Stepper {
            forward,
            inverse,
            kinetic: vec![],
            kinetic_dt: f64::NAN,
            k2: setup.wavenumbers().iter().map(|k| k * k).collect(),
            scratch,
        }
    }

    /// `exp(-i hbar k^2 dt / 2m) / nx`, cached per step size.
    fn kinetic_factor(&mut self, dt: f64, consts: &PhysicalConstants) {
        if self.kinetic_dt == dt {
            return;
        }
        let n = self.k2.len() as f64;
        let c = consts.hbar * dt / (2.0 * consts.mass);
        self.kinetic = self
            .k2
            .iter()
            .map(|k2| Complex64::from_polar(1.0 / n, -c * k2))
            .collect();
        self.kinetic_dt = dt;
    }

    fn kinetic_step(&mut self, psi: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (z, f) in psi.iter_mut().zip(&self.kinetic) {
            *z *= f;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }
}

/// Evolve `psi0` from `t0` through each time in `times` with the Strang
/// splitting `exp(-iV dt/2hbar) F^-1 exp(-i hbar k^2 dt/2m) F exp(-iV dt/2hbar)`,
/// `V` sampled at step midpoints. Times may decrease for backward evolution;
/// each interval is split into equal steps no longer than `setup.dt`.
pub fn split_step<V>(
    psi0: &[Complex64],
    potential: V,
    setup: &PropagationSetup,
    t0: f64,
    times: &[f64],
) -> Result<Evolution, PropagateError>
where
    V: Fn(f64, f64) -> f64 + Sync,
{
    setup.validate()?;
    if psi0.len() != setup.nx {
        return Err(PropagateError::ShapeMismatch {
            got: psi0.len(),
            want: setup.nx,
        });
    }
    if psi0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(PropagateError::NonFinite { step: 0, t: t0 });
    }
    let xs = setup.xs();
    let dx = setup.dx();
    let hbar = setup.consts.hbar;
    let taper = (setup.absorber_cells > 0).then(|| cosine_taper(setup.nx, setup.absorber_cells));
    let mut stepper = Stepper::new(setup);
    let mut psi = psi0.to_vec();
    let mut potential_row = vec![0.0; setup.nx];
    let mut warned = false;

    let mut out = Evolution {
        setup: *setup,
        xs: xs.clone(),
        snapshots: vec![Snapshot {
            t: t0,
            psi: psi.clone(),
        }],
        norms: vec![l2_norm(&psi, dx)],
        max_step_norm_drift: 0.0,
        steps: 0,
        warnings: vec![],
    };

    let mut t = t0;
    for &target in times {
        let span = target - t;
        let n = (span.abs() / setup.dt).ceil().max(if span == 0.0 { 0.0 } else { 1.0 }) as usize;
        let dt = if n == 0 { 0.0 } else { span / n as f64 };
        if n > 0 {
            stepper.kinetic_factor(dt, &setup.consts);
        }
        for i in 0..n {
            let t_mid = t + (i as f64 + 0.5) * dt;
            potential_row
                .par_iter_mut()
                .zip(xs.par_iter())
                .for_each(|(v, &x)| *v = potential(x, t_mid));
            if let Some(j) = potential_row.iter().position(|v| !v.is_finite()) {
                return Err(PropagateError::BadPotential { x: xs[j], t: t_mid });
            }
            let v_max = potential_row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !warned && dt.abs() * v_max / hbar > 0.1 {
                out.warnings.push(format!(
                    "dt max|V| / hbar = {:.3} exceeds 0.1; splitting error may dominate",
                    dt.abs() * v_max / hbar
                ));
                warned = true;
            }
            let before = l2_norm(&psi, dx);
            let half = -0.5 * dt / hbar;
            for (z, v) in psi.iter_mut().zip(&potential_row) {
                *z *= Complex64::from_polar(1.0, half * v);
            }
            stepper.kinetic_step(&mut psi);
            for (z, v) in psi.iter_mut().zip(&potential_row) {
                *z *= Complex64::from_polar(1.0, half * v);
            }
            if let Some(w) = &taper {
                for (z, w) in psi.iter_mut().zip(w) {
                    *z *= w;
                }
            }
            out.steps += 1;
            if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(PropagateError::NonFinite {
                    step: out.steps,
                    t: t + (i as f64 + 1.0) * dt,
                });
            }
            out.max_step_norm_drift = out.max_step_norm_drift.max((l2_norm(&psi, dx) - before).abs());
        }
        t = target;
        out.norms.push(l2_norm(&psi, dx));
        out.snapshots.push(Snapshot { t, psi: psi.clone() });
    }
    Ok(out)
}

/// Closed-form `psi` of `bundle` on the propagation grid at time `t`;
/// excluded or non-finite points are set to zero.
pub fn sample_bundle(bundle: &SolutionBundle, xs: &[f64], t: f64) -> Result<Vec<Complex64>, PropagateError> {
    let mask = bundle.exclusion_mask()?;
    let a = bundle.amplitude.compile().map_err(PolarError::from)?;
    let s = bundle.phase.compile().map_err(PolarError::from)?;
    let hbar = bundle.consts.hbar;
    Ok(xs
        .par_iter()
        .map(|&x| {
            if mask.excludes(x, t) {
                return Complex64::default();
            }
            let z = Complex64::from_polar(a.eval_raw(x, t), s.eval_raw(x, t) / hbar);
            if z.re.is_finite() && z.im.is_finite() {
                z
            } else {
                Complex64::default()
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `psi_num - psi_closed`.
    Complex,
    /// `|psi_num| - |psi_closed|`.
    Abs,
    /// `|psi_num|^2 - |psi_closed|^2`.
    Density,
    /// `e^{i theta} psi_num - psi_closed` with the best global phase per snapshot.
    PhaseGauged,
}

#[derive(Clone, Debug, Serialize)]
pub struct SnapshotError {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionReport {
    pub metric: Metric,
    /// Fraction of cells skipped at each edge.
    pub edge_fraction: f64,
    pub snapshots: Vec<SnapshotError>,
    /// Largest per-snapshot `l2`.
    pub l2: f64,
    pub linf: f64,
}

/// Distance between the evolved snapshots and the closed form, on the
/// window that drops `edge_fraction` of the cells at each boundary.
pub fn compare_evolution(
    bundle: &SolutionBundle,
    evolution: &Evolution,
    metric: Metric,
    edge_fraction: f64,
) -> Result<EvolutionReport, PropagateError> {
    if !(0.0..0.5).contains(&edge_fraction) {
        return Err(PropagateError::InvalidSetup(format!(
            "edge fraction {edge_fraction} must lie in [0, 0.5)"
        )));
    }
    let nx = evolution.xs.len();
    let skip = (edge_fraction * nx as f64).round() as usize;
    let window = skip..nx - skip;
    let mask = bundle.exclusion_mask()?;
    let dx = evolution.setup.dx();

    let snapshots = evolution
        .snapshots
        .par_iter()
        .map(|snap| {
            if snap.psi.len() != nx {
                return Err(PropagateError::ShapeMismatch {
                    got: snap.psi.len(),
                    want: nx,
                });
            }
            let closed = sample_bundle(bundle, &evolution.xs, snap.t)?;
            let keep: Vec<usize> = window
                .clone()
                .filter(|&j| !mask.excludes(evolution.xs[j], snap.t))
                .collect();
            let gauge = if metric == Metric::PhaseGauged {
                let overlap: Complex64 = keep.iter().map(|&j| snap.psi[j].conj() * closed[j]).sum();
                if overlap.norm() > 0.0 {
                    overlap / overlap.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                }
            } else {
                Complex64::new(1.0, 0.0)
            };
            let (mut sq, mut worst) = (0.0f64, 0.0f64);
            for &j in &keep {
                let (num, exact) = (snap.psi[j], closed[j]);
                let d = match metric {
                    Metric::Complex => (num - exact).norm(),
                    Metric::PhaseGauged => (num * gauge - exact).norm(),
                    Metric::Abs => (num.norm() - exact.norm()).abs(),
                    Metric::Density => (num.norm_sqr() - exact.norm_sqr()).abs(),
                };
                sq += d * d;
                worst = worst.max(d);
            }
            Ok(SnapshotError {
                t: snap.t,
                l2: (sq * dx).sqrt(),
                linf: worst,
            })
        })
        .collect::<Result<Vec<_>, PropagateError>>()?;
    Ok(EvolutionReport {
        metric,
        edge_fraction,
        l2: snapshots.iter().map(|s| s.l2).fold(0.0, f64::max),
        linf: snapshots.iter().map(|s| s.linf).fold(0.0, f64::max),
        snapshots,
    })
}

impl Evolution {
    /// `t,x,re,im,abs` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,re,im,abs\n");
        for s in &self.snapshots {
            for (x, z) in self.xs.iter().zip(&s.psi) {
                out.push_str(&format!("{},{},{:e},{:e},{:e}\n", s.t, x, z.re, z.im, z.norm()));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let snaps: Vec<_> = self
            .snapshots
            .iter()
            .zip(&self.norms)
            .map(|(s, n)| {
                serde_json::json!({
                    "t": s.t,
                    "norm": n,
                    "re": s.psi.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": s.psi.iter().map(|z| z.im).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "setup": self.setup,
            "x": self.xs,
            "steps": self.steps,
            "max_step_norm_drift": self.max_step_norm_drift,
            "warnings": self.warnings,
            "snapshots": snaps,
        })
    }
}
