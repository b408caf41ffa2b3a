use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("field has nonzero mean {mean:e}; operator requires mean-zero input")]
    NonzeroMean { mean: f64 },
    #[error("invalid viscosity bounds: {0}")]
    InvalidBounds(String),
    #[error("viscosity value {value} outside declared bounds [{lo}, {hi}]")]
    BoundsViolation { lo: f64, hi: f64, value: f64 },
    #[error("velocity is not divergence-free (relative divergence {0:e})")]
    NotDivergenceFree(f64),
    #[error("conjugate gradient did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("CFL violation: Courant number {0:.4} exceeds 1")]
    Cfl(f64),
    #[error("unit tangent degenerated: min |tau| = {0:e} before renormalization")]
    DegenerateTangent(f64),
    #[error("blow-up guard tripped at t = {t}: max |omega| = {value:e}")]
    BlowUp { t: f64, value: f64 },
    #[error("interface self-intersects near segments {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config{}: key `{key}`: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        key: String,
        message: String,
    },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("step failed at t = {t}: {source}")]
    StepFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }
}
