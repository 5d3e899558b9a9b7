//! Resolution of flags and config files into a solution bundle.

use std::fs;

use bohmlab::expr::{parse, Expr};
use bohmlab::families::{self, default_grid, FamilyConfig, GridSpec};
use bohmlab::numerics::Grid;
use bohmlab::polar::{bundle_from_f, check_amplitude_domain, PhysicalConstants, SolutionBundle};
use serde_json::{Map, Value};

use crate::args::SourceArgs;
use crate::error::CliError;

/// Grid used for `--f-expr` runs without `--grid`.
const CUSTOM_GRID: ((f64, f64), usize, (f64, f64), usize) = ((-8.0, 8.0), 128, (0.1, 2.0), 64);
const CUSTOM_FD_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub enum Source {
    Family(FamilyConfig),
    Custom { f: Expr, mu: Expr },
}

impl Source {
    pub fn id(&self) -> &str {
        match self {
            Source::Family(cfg) => cfg.id(),
            Source::Custom { .. } => "custom",
        }
    }

    pub fn family(&self) -> Option<&FamilyConfig> {
        match self {
            Source::Family(cfg) => Some(cfg),
            Source::Custom { .. } => None,
        }
    }

    pub fn default_spec(&self) -> GridSpec {
        match self {
            Source::Family(cfg) => default_grid(cfg.id()).expect("every family has a default grid"),
            Source::Custom { .. } => {
                let (x, nx, t, nt) = CUSTOM_GRID;
                GridSpec {
                    grid: Grid::new(x, nx, t, nt).expect("custom default grid is valid"),
                    fd_step: CUSTOM_FD_STEP,
                }
            }
        }
    }

    pub fn build(&self, consts: &PhysicalConstants) -> Result<SolutionBundle, CliError> {
        match self {
            Source::Family(cfg) => Ok(families::build(cfg, consts)?),
            Source::Custom { f, mu } => Ok(bundle_from_f("custom", f, mu, consts)?),
        }
    }

    /// A user-supplied `f` must have `f' > 0` on the whole grid.
    pub fn check_domain(&self, grid: &Grid, consts: &PhysicalConstants) -> Result<(), CliError> {
        if let Source::Custom { f, .. } = self {
            let f = f.bind(&consts.bindings());
            let points: Vec<(f64, f64)> = grid
                .ts()
                .into_iter()
                .flat_map(|t| grid.xs().into_iter().map(move |x| (x, t)))
                .collect();
            check_amplitude_domain(&f, &points)?;
        }
        Ok(())
    }
}

/// Everything a command needs to know about the run.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub source: Source,
    pub consts: PhysicalConstants,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    pub fd_step: Option<f64>,
}

impl Resolved {
    pub fn spec(&self) -> GridSpec {
        let mut spec = self.source.default_spec();
        if let Some(g) = self.grid {
            spec.grid = g;
        }
        if let Some(h) = self.fd_step {
            spec.fd_step = h;
        }
        spec
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_config(path: &std::path::Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(usage(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(usage(format!("{}: {e}", path.display()))),
    }
}

fn number(map: &Map<String, Value>, key: &str) -> Result<Option<f64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| usage(format!("`{key}` must be a number"))),
    }
}

fn text(map: &Map<String, Value>, key: &str) -> Result<Option<String>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(usage(format!("`{key}` must be a string"))),
    }
}

/// `VALUE` of a `--set` pair: a number when it parses as one, else a string.
pub fn parse_value(raw: &str) -> Value {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 && !raw.contains('.') && !raw.contains('e') => {
            Value::from(v as i64)
        }
        Ok(v) => Value::from(v),
        Err(_) => Value::String(raw.trim().to_string()),
    }
}

/// Set `params.<path>` where `path` may be dotted, e.g. `kind.q`.
pub fn set_param(params: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = params;
    let keys: Vec<&str> = path.split('.').collect();
    for (k, key) in keys.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| usage(format!("parameter path `{path}` does not name an object")))?;
        if k + 1 == keys.len() {
            if !obj.contains_key(*key) {
                let known: Vec<&String> = obj.keys().collect();
                return Err(usage(format!("unknown parameter `{path}` (known: {known:?})")));
            }
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(*key)
            .ok_or_else(|| usage(format!("unknown parameter `{path}`")))?;
    }
    Ok(())
}

/// Family config as JSON `{"family": id, "params": {...}}` with the defaults
/// filled in for missing parameters.
fn family_json(id: &str, params: Option<&Value>) -> Result<Value, CliError> {
    let defaults =
        FamilyConfig::default_for(id).ok_or_else(|| usage(format!("unknown family `{id}` (see `bohmlab list`)")))?;
    let mut json = serde_json::to_value(&defaults).expect("family config serializes");
    if let Some(given) = params {
        let given = given.as_object().ok_or_else(|| usage("`params` must be an object"))?;
        let slot = json["params"].as_object_mut().expect("params object");
        for (k, v) in given {
            if !slot.contains_key(k) {
                return Err(usage(format!("unknown parameter `{k}` for {id}")));
            }
            slot.insert(k.clone(), v.clone());
        }
    }
    Ok(json)
}

pub fn config_from_json(json: Value) -> Result<FamilyConfig, CliError> {
    let cfg: FamilyConfig = serde_json::from_value(json).map_err(|e| usage(format!("bad family parameters: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Family JSON before `--set` overrides are turned into a config; sweeps
/// reuse it to substitute one parameter at a time.
pub fn resolve_json(args: &SourceArgs) -> Result<(Option<Value>, Resolved), CliError> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => Map::new(),
    };

    let family = args.family.clone().or(text(&file, "family")?);
    let f_text = args.f_expr.clone().or(text(&file, "f_expr")?);
    let mu_text = args.mu_expr.clone().or(text(&file, "mu_expr")?);
    if family.is_some() == f_text.is_some() {
        return Err(usage(
            "supply exactly one of --family and --f-expr (or a config naming one)",
        ));
    }
    if family.is_some() && mu_text.is_some() {
        return Err(usage("--mu-expr only applies with --f-expr"));
    }

    let hbar = args.hbar.or(number(&file, "hbar")?).unwrap_or(1.0);
    let mass = args.mass.or(number(&file, "mass")?).unwrap_or(1.0);
    let consts = PhysicalConstants::new(hbar, mass).map_err(|e| usage(e.to_string()))?;
    let grid = match text(&file, "grid")? {
        Some(g) => Some(Grid::parse(&g).map_err(|e| usage(e.to_string()))?),
        None => None,
    };
    let tol = number(&file, "tol")?;
    let fd_step = number(&file, "fd_step")?;

    let (json, source) = match family {
        Some(id) => {
            let mut json = family_json(&id, file.get("params"))?;
            for pair in &args.set {
                let (name, raw) = pair
                    .split_once('=')
                    .ok_or_else(|| usage(format!("--set expects NAME=VALUE, got `{pair}`")))?;
                set_param(&mut json["params"], name.trim(), parse_value(raw))?;
            }
            let cfg = config_from_json(json.clone())?;
            (Some(json), Source::Family(cfg))
        }
        None => {
            if !args.set.is_empty() {
                return Err(usage("--set only applies to builtin families"));
            }
            let f = parse(f_text.as_deref().unwrap_or_default())?;
            let mu = parse(mu_text.as_deref().unwrap_or("0"))?;
            (None, Source::Custom { f, mu })
        }
    };
    Ok((
        json,
        Resolved {
            source,
            consts,
            grid,
            tol,
            fd_step,
        },
    ))
}

pub fn resolve(args: &SourceArgs, grid_flag: Option<&str>) -> Result<Resolved, CliError> {
    let (_, mut resolved) = resolve_json(args)?;
    if let Some(g) = grid_flag {
        resolved.grid = Some(Grid::parse(g).map_err(|e| usage(e.to_string()))?);
    }
    Ok(resolved)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_values_keep_their_type() {
        assert_eq!(parse_value("3"), Value::from(3));
        assert_eq!(parse_value("0.5"), Value::from(0.5));
        assert_eq!(parse_value("minus"), Value::from("minus"));
        assert_eq!(parse_value("t^2"), Value::from("t^2"));
    }

    #[test]
    fn overrides_reach_nested_parameters() {
        let args = SourceArgs {
            family: Some("scaling_packet".into()),
            set: vec!["kind.q=0.5".into(), "alpha=2".into()],
            ..Default::default()
        };
        let (_, r) = resolve_json(&args).unwrap();
        let json = serde_json::to_value(r.source.family().unwrap()).unwrap();
        assert_eq!(json["params"]["kind"]["q"], 0.5);
        assert_eq!(json["params"]["alpha"], 2.0);
    }

    #[test]
    fn source_must_be_unique() {
        let both = SourceArgs {
            family: Some("plane_wave".into()),
            f_expr: Some("x".into()),
            ..Default::default()
        };
        assert!(matches!(resolve_json(&both), Err(CliError::Usage(_))));
        assert!(matches!(resolve_json(&SourceArgs::default()), Err(CliError::Usage(_))));
        let typo = SourceArgs {
            family: Some("plane_wave".into()),
            set: vec!["kk=2".into()],
            ..Default::default()
        };
        assert!(matches!(resolve_json(&typo), Err(CliError::Usage(_))));
    }
}
