use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("expected {expected} component(s), found {found}")]
    Arity { expected: usize, found: usize },

    #[error("domain error in component {component}: {message}")]
    Domain { component: usize, message: String },

    #[error("component {component} is not differentiable at the evaluation point: {message}")]
    NotDifferentiable { component: usize, message: String },

    #[error("point {point:?} lies outside the closed unit cube")]
    OutsideCube { point: Vec<f64> },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested tolerance cannot be reached because the mesh would have
    /// to be coarser than the unit cube itself.
    #[error("mesh coarser than domain: epsilon {epsilon} exceeds beta_f(1) = {max_level}")]
    MeshCoarserThanDomain { epsilon: f64, max_level: f64 },

    #[error("epsilon {epsilon} outside admissible range (0, {upper}); cutoffs: profile {profile_cutoff}, dimension {dimension_cutoff}")]
    EpsilonRange {
        epsilon: f64,
        upper: f64,
        profile_cutoff: f64,
        dimension_cutoff: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
