use bohmlab::numerics::Grid;
use bohmlab::polar::SolutionBundle;
use rayon::prelude::*;
use serde_json::json;

use crate::args::GenerateArgs;
use crate::error::CliError;
use crate::output::{announce, Cell, Sink};
use crate::source::{resolve, Resolved};

pub const COLUMNS: [&str; 8] = ["x", "t", "A", "S", "re", "im", "V", "V_B"];

/// One row per grid node, `t` outer; excluded nodes keep only `x, t`.
pub fn tabulate(bundle: &SolutionBundle, grid: &Grid) -> Result<(Vec<Vec<Cell>>, f64), CliError> {
    let mask = bundle.exclusion_mask()?;
    let exprs = [
        &bundle.amplitude,
        &bundle.phase,
        &bundle.potential,
        &bundle.bohm_potential,
    ];
    let compiled = exprs.iter().map(|e| e.compile()).collect::<Result<Vec<_>, _>>()?;
    let hbar = bundle.consts.hbar;

    let rows = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, t) = (grid.x(k % grid.nx), grid.t(k / grid.nx));
            let mut row = vec![Cell::Num(x), Cell::Num(t)];
            if mask.excludes(x, t) {
                row.extend(std::iter::repeat_n(Cell::Missing, 6));
                return Ok((row, true));
            }
            let v: Vec<f64> = compiled.iter().map(|c| c.eval(x, t)).collect::<Result<_, _>>()?;
            let (a, s) = (v[0], v[1]);
            let (sin, cos) = (s / hbar).sin_cos();
            row.extend([a, s, a * cos, a * sin, v[2], v[3]].map(Cell::Num));
            Ok((row, false))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let excluded = rows.iter().filter(|(_, e)| *e).count();
    if excluded == rows.len() {
        return Err(CliError::Domain("every grid node is excluded".into()));
    }
    let fraction = excluded as f64 / rows.len() as f64;
    Ok((rows.into_iter().map(|(r, _)| r).collect(), fraction))
}

pub fn metadata(resolved: &Resolved, bundle: &SolutionBundle, grid: &Grid) -> serde_json::Value {
    json!({
        "family": resolved.source.id(),
        "config": resolved.source.family(),
        "constants": bundle.consts,
        "grid": grid,
        "f": bundle.f.as_ref().map(|e| e.to_string()),
        "mu": bundle.mu.to_string(),
        "amplitude": bundle.amplitude.to_string(),
        "phase": bundle.phase.to_string(),
        "potential": bundle.potential.to_string(),
        "bohm_potential": bundle.bohm_potential.to_string(),
        "vanishing_bohm": bundle.vanishing_bohm,
        "exclusions": bundle.exclusions.iter().map(|e| e.describe()).collect::<Vec<_>>(),
    })
}

pub fn run(args: &GenerateArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source, args.grid.as_deref())?;
    let grid = resolved.spec().grid;
    resolved.source.check_domain(&grid, &resolved.consts)?;
    let bundle = resolved.source.build(&resolved.consts)?;
    let (rows, excluded) = tabulate(&bundle, &grid)?;
    let mut meta = metadata(&resolved, &bundle, &grid);
    meta["excluded_fraction"] = excluded.into();
    meta["columns"] = json!(COLUMNS);
    let sink = Sink::new(&args.output);
    let paths = sink.table("fields", &COLUMNS, &rows, meta)?;
    announce(&paths);
    println!(
        "{}: {} x {} nodes, {:.1}% excluded",
        resolved.source.id(),
        grid.nx,
        grid.nt,
        100.0 * excluded
    );
    Ok(())
}
