use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "bohmlab",
    version,
    about = "Exact Schrödinger solutions from a generating function: catalog, verification, propagation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the builtin solution families.
    List(ListArgs),
    /// Tabulate A, S, psi, V and V_B on a grid.
    Generate(GenerateArgs),
    /// Run the residual checks; exit 1 if any fails.
    Verify(VerifyArgs),
    /// Evolve the initial state with the split-step method and compare.
    Propagate(PropagateArgs),
    /// Tabulate a derived scalar over a range of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct ListArgs {
    /// Print the catalog as JSON.
    #[arg(long)]
    pub json: bool,
    /// Keep only one section, e.g. `VI`.
    #[arg(long)]
    pub section: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where the solution comes from, plus physical constants.
#[derive(Args, Debug, Clone, Default)]
pub struct SourceArgs {
    /// Builtin family id (see `bohmlab list`).
    #[arg(long)]
    pub family: Option<String>,
    /// Generating function f(x, t).
    #[arg(long = "f-expr", value_name = "EXPR", allow_hyphen_values = true)]
    pub f_expr: Option<String>,
    /// Gauge function mu(t) used with --f-expr (default 0).
    #[arg(long = "mu-expr", value_name = "EXPR", allow_hyphen_values = true)]
    pub mu_expr: Option<String>,
    /// JSON run configuration.
    #[arg(long, value_name = "FILE.json")]
    pub config: Option<PathBuf>,
    /// Override a family parameter, e.g. `--set beta=2` or `--set kind.q=0.5`.
    #[arg(long = "set", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    pub set: Vec<String>,
    /// Reduced Planck constant (default 1).
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Particle mass (default 1).
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, default_value = "bohmlab-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// `xmin,xmax,nx,tmin,tmax,nt`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Verify every builtin family at its defaults.
    #[arg(long, conflicts_with_all = ["family", "f_expr", "config"])]
    pub all: bool,
    /// `xmin,xmax,nx,tmin,tmax,nt`; defaults to the family's window.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Tolerance on the finite-difference Schrödinger residual.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance on the checks built from exact derivatives.
    #[arg(long = "exact-tol", default_value_t = 1e-8)]
    pub exact_tol: f64,
    /// Finite-difference step of the Schrödinger stencil.
    #[arg(long = "fd-step")]
    pub fd_step: Option<f64>,
    /// Also compare with the Van Vleck-Morette amplitude.
    #[arg(long)]
    pub vvm: bool,
    /// Add `EPS x^2` to the phase (negative control).
    #[arg(long = "corrupt-phase", value_name = "EPS", allow_hyphen_values = true)]
    pub corrupt_phase: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Complex,
    Abs,
    Density,
    PhaseGauged,
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// `xmin,xmax,nx,tmin,tmax,nt`: periodic x grid (nx a power of two) and
    /// nt snapshot times including the start.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Largest time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Cosine-taper absorber width in cells at each edge.
    #[arg(long)]
    pub absorber: Option<usize>,
    /// Smooth window applied to the initial state, in cells at each edge.
    #[arg(long)]
    pub window: Option<usize>,
    /// Fraction of cells at each edge left out of the comparison.
    #[arg(long = "edge-fraction")]
    pub edge_fraction: Option<f64>,
    /// How numeric and closed-form states are compared.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Largest allowed L2 error; exit 1 above it.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Repeat with dt/2 and report the error ratio.
    #[arg(long = "order-check")]
    pub order_check: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Acceleration,
    PhaseVelocity,
    InverseSquare,
    Residual,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Parameter to vary.
    #[arg(long)]
    pub param: String,
    /// Explicit values, comma separated.
    #[arg(long, conflicts_with = "range", allow_hyphen_values = true)]
    pub values: Option<String>,
    /// `start,stop,count`, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Derived scalar; defaults by family.
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
    /// `xmin,xmax,nx,tmin,tmax,nt`; sets the time span and residual grid.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}
