use bohmlab::families::GridSpec;
use bohmlab::polar::SolutionBundle;
use bohmlab::propagate::{
    compare_evolution, edge_window, sample_bundle, split_step, EvolutionReport, Metric, PropagationSetup,
};
use serde::Serialize;

use crate::args::{Format, MetricArg, PropagateArgs};
use crate::error::CliError;
use crate::output::{announce, Sink};
use crate::source::{resolve, Source};

/// Numerical setup of one propagation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub x: (f64, f64),
    pub nx: usize,
    pub times: Vec<f64>,
    pub dt: f64,
    pub absorber: usize,
    pub window: usize,
    pub edge_fraction: f64,
    pub metric: Metric,
    pub tol: Option<f64>,
}

fn times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
}

/// Defaults per family. Packets that do not decay are cut off by a smooth
/// window and compared away from the box edges.
pub fn default_plan(source: &Source, spec: &GridSpec) -> Plan {
    let base = |x, nx, t: (f64, f64), dt, absorber, window, edge, metric, tol| Plan {
        x,
        nx,
        times: times(t.0, t.1, 3),
        dt,
        absorber,
        window,
        edge_fraction: edge,
        metric,
        tol,
    };
    match source.id() {
        "scaling_packet" => base(
            (-16.0, 16.0),
            1024,
            (0.0, 0.5),
            1e-2,
            0,
            0,
            0.0,
            Metric::Complex,
            Some(1e-4),
        ),
        "plane_wave" => base(
            (-64.0, 64.0),
            4096,
            (0.0, 1.0),
            1e-2,
            0,
            410,
            0.3,
            Metric::Complex,
            Some(1e-6),
        ),
        "airy_packet" => base(
            (-60.0, 20.0),
            4096,
            (0.0, 1.0),
            2e-3,
            256,
            400,
            0.25,
            Metric::Density,
            None,
        ),
        "oscillator_alt1" => base((-64.0, 64.0), 8192, (0.0, 1.0), 4e-3, 0, 819, 0.35, Metric::Abs, None),
        _ => {
            let g = spec.grid;
            let (c, half) = (0.5 * (g.x_min + g.x_max), g.x_max - g.x_min);
            base(
                (c - half, c + half),
                2048,
                (g.t_min, g.t_min + 0.25 * (g.t_max - g.t_min)),
                1e-3,
                0,
                256,
                0.3,
                Metric::PhaseGauged,
                None,
            )
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub family: String,
    pub plan: Plan,
    pub report: EvolutionReport,
    pub norms: Vec<f64>,
    pub max_step_norm_drift: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
    /// `||psi_closed||` on the compared window, one per snapshot.
    pub reference_norms: Vec<f64>,
    /// Final-time error at `dt` over the error at `dt / 2`.
    pub order_ratio: Option<f64>,
}

/// Closed-form L2 norm over the cells that [`compare_evolution`] keeps.
fn reference_norm(bundle: &SolutionBundle, xs: &[f64], t: f64, edge_fraction: f64) -> Result<f64, CliError> {
    let nx = xs.len();
    let skip = (edge_fraction * nx as f64).round() as usize;
    let mask = bundle.exclusion_mask()?;
    let dx = xs[1] - xs[0];
    let closed = sample_bundle(bundle, xs, t)?;
    let sq: f64 = (skip..nx - skip)
        .filter(|&j| !mask.excludes(xs[j], t))
        .map(|j| closed[j].norm_sqr())
        .sum();
    Ok((sq * dx).sqrt())
}

pub fn evolve(
    bundle: &SolutionBundle,
    plan: &Plan,
    dt: f64,
) -> Result<(bohmlab::propagate::Evolution, EvolutionReport), CliError> {
    let setup = PropagationSetup::new(plan.x, plan.nx, dt, plan.absorber, bundle.consts)?;
    let xs = setup.xs();
    let t0 = plan.times[0];
    let mut psi0 = sample_bundle(bundle, &xs, t0)?;
    if plan.window > 0 {
        for (z, w) in psi0.iter_mut().zip(edge_window(plan.nx, plan.window)) {
            *z *= w;
        }
    }
    let potential = bundle.potential.compile()?;
    let evolution = split_step(&psi0, |x, t| potential.eval_raw(x, t), &setup, t0, &plan.times[1..])?;
    let report = compare_evolution(bundle, &evolution, plan.metric, plan.edge_fraction)?;
    Ok((evolution, report))
}

fn metric(m: MetricArg) -> Metric {
    match m {
        MetricArg::Complex => Metric::Complex,
        MetricArg::Abs => Metric::Abs,
        MetricArg::Density => Metric::Density,
        MetricArg::PhaseGauged => Metric::PhaseGauged,
    }
}

/// Box, cell count, time span and snapshot count.
type BoxSpec = ((f64, f64), usize, (f64, f64), usize);

/// `xmin,xmax,nx,tmin,tmax,nt` without the node minimum of verification grids.
fn parse_box(text: &str) -> Result<BoxSpec, CliError> {
    let bad = || CliError::Usage(format!("expected xmin,xmax,nx,tmin,tmax,nt; got `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(bad());
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let count = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let (t0, t1) = (num(parts[3])?, num(parts[4])?);
    if !(t1 > t0) {
        return Err(CliError::Usage("propagation times must increase".into()));
    }
    Ok((
        (num(parts[0])?, num(parts[1])?),
        count(parts[2])?,
        (t0, t1),
        count(parts[5])?,
    ))
}

pub fn run(args: &PropagateArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source, None)?;
    let mut plan = default_plan(&resolved.source, &resolved.spec());
    if let Some(text) = &args.grid {
        let (x, nx, t, nt) = parse_box(text)?;
        plan.x = x;
        plan.nx = nx;
        plan.times = times(t.0, t.1, nt);
    }
    if let Some(dt) = args.dt {
        plan.dt = dt;
    }
    if let Some(a) = args.absorber {
        plan.absorber = a;
    }
    if let Some(w) = args.window {
        plan.window = w;
    }
    if let Some(e) = args.edge_fraction {
        plan.edge_fraction = e;
    }
    if let Some(m) = args.metric {
        plan.metric = metric(m);
    }
    if args.tol.is_some() {
        plan.tol = args.tol;
    }
    if plan.window >= plan.nx / 2 {
        return Err(CliError::Usage(format!(
            "window of {} cells does not fit {} cells",
            plan.window, plan.nx
        )));
    }

    let bundle = resolved.source.build(&resolved.consts)?;
    let (evolution, report) = evolve(&bundle, &plan, plan.dt)?;
    let order_ratio = if args.order_check {
        let (_, fine) = evolve(&bundle, &plan, plan.dt / 2.0)?;
        let last = |r: &EvolutionReport| r.snapshots.last().map_or(f64::NAN, |s| s.l2);
        Some(last(&report) / last(&fine))
    } else {
        None
    };

    for w in &evolution.warnings {
        eprintln!("warning: {w}");
    }
    let reference_norms = report
        .snapshots
        .iter()
        .map(|s| reference_norm(&bundle, &evolution.xs, s.t, plan.edge_fraction))
        .collect::<Result<Vec<_>, _>>()?;
    for (s, r) in report.snapshots.iter().zip(&reference_norms) {
        println!(
            "t={:<8.4} l2={:.3e} linf={:.3e} relative={:.3e}",
            s.t,
            s.l2,
            s.linf,
            s.l2 / r
        );
    }
    if let Some(r) = order_ratio {
        println!("dt-halving error ratio {r:.3}");
        if bundle.potential.as_num() == Some(0.0) {
            println!("note: V = 0, so the splitting is exact in time and the ratio reflects spatial error only");
        }
    }

    let outcome = Outcome {
        family: resolved.source.id().to_string(),
        plan: plan.clone(),
        norms: evolution.norms.clone(),
        max_step_norm_drift: evolution.max_step_norm_drift,
        steps: evolution.steps,
        warnings: evolution.warnings.clone(),
        report,
        reference_norms,
        order_ratio,
    };
    let sink = Sink::new(&args.output);
    let mut paths = vec![sink.write_json("propagate.json", &outcome)?];
    paths.push(match sink.format {
        Format::Csv => sink.write("snapshots.csv", &evolution.to_csv())?,
        Format::Json => sink.write_json("snapshots.json", &evolution.to_json())?,
    });
    announce(&paths);

    match plan.tol {
        Some(tol) if !(outcome.report.l2 <= tol) => Err(CliError::Failed(format!(
            "{}/propagation l2 {:.3e} > {tol:e}",
            outcome.family, outcome.report.l2
        ))),
        _ => Ok(()),
    }
}
