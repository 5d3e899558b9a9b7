use std::fmt;

use bohmlab::expr::ExprError;
use bohmlab::families::FamilyError;
use bohmlab::numerics::NumericsError;
use bohmlab::polar::PolarError;
use bohmlab::propagate::PropagateError;
use bohmlab::specfun::SpecfunError;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: a check exceeded its tolerance.
    Failed(String),
    /// Exit 2: bad flags, config or expression.
    Usage(String),
    /// Exit 3: the solution is undefined or singular where it was asked for.
    Domain(String),
    /// Exit 2: output could not be written.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::Domain(_) => CliError::Domain(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::InvalidGrid(_)
            | NumericsError::InvalidAxis(_)
            | NumericsError::InvalidOrder(_)
            | NumericsError::TooFewSamples(_) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<PolarError> for CliError {
    fn from(e: PolarError) -> Self {
        match e {
            PolarError::Expr(inner) => inner.into(),
            PolarError::Numerics(inner) => inner.into(),
            PolarError::InvalidConstants(m) => CliError::Usage(m),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<SpecfunError> for CliError {
    fn from(e: SpecfunError) -> Self {
        match e {
            SpecfunError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::InvalidParameter { .. } | FamilyError::Unsupported(_) => CliError::Usage(e.to_string()),
            FamilyError::Expr(inner) => inner.into(),
            FamilyError::Polar(inner) => inner.into(),
            FamilyError::Specfun(inner) => inner.into(),
            FamilyError::Numerics(inner) => inner.into(),
        }
    }
}

impl From<PropagateError> for CliError {
    fn from(e: PropagateError) -> Self {
        match e {
            PropagateError::InvalidSetup(_) | PropagateError::ShapeMismatch { .. } => CliError::Usage(e.to_string()),
            PropagateError::Polar(inner) => inner.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}
