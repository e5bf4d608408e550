use thiserror::Error;

/// Errors raised by the numerical layers and the command line front-end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: partial value {value}, error estimate {error}")]
    Divergence { value: f64, error: f64 },

    #[error("singular jacobian at {0:?}")]
    Singular(Vec<f64>),

    #[error("no convergence after {iterations} iterations (residual {residual}, last iterate {iterate:?})")]
    NonConvergence {
        iterate: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    #[error("solution exceeded the configured cap at t = {t}")]
    Explosion { t: f64 },

    #[error("discretization failure: {0}")]
    Discretization(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("eps = {eps} is outside the admissible range (0, {max})")]
    Range { eps: f64, max: f64 },

    #[error("lattice: {0}")]
    Lattice(String),

    #[error("obstruction: {0}")]
    Obstruction(String),

    #[error("contract: {0}")]
    Contract(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::Precondition(_)
            | Error::Config(_)
            | Error::Contract(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Divergence { .. }
            | Error::Singular(_)
            | Error::NonConvergence { .. }
            | Error::Explosion { .. }
            | Error::Discretization(_) => 3,
            Error::Geometry(_) | Error::Range { .. } | Error::Lattice(_) | Error::Obstruction(_) => 4,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Precondition(_) => "precondition",
            Error::Divergence { .. } => "divergence",
            Error::Singular(_) => "singular",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Explosion { .. } => "explosion",
            Error::Discretization(_) => "discretization",
            Error::Geometry(_) => "geometry",
            Error::Range { .. } => "range",
            Error::Lattice(_) => "lattice",
            Error::Obstruction(_) => "obstruction",
            Error::Contract(_) => "contract",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
