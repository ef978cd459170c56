use thiserror::Error;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension n = {0}: at least 2 vertices are required")]
    InvalidDimension(usize),

    #[error("perturbation t = {t} lies outside the open interval (0, 1/{n})")]
    PerturbationOutOfRange { t: Rational, n: usize },

    #[error("delta = {0} lies outside the open interval (0, 1)")]
    InvalidDelta(Rational),

    #[error("column set is not a basis: {0}")]
    NotABasis(String),

    #[error("solution is not a vertex of the Birkhoff polytope: {0}")]
    NotAVertex(String),

    #[error("sensitivity hypothesis violated: |gamma[{index}]| = {value} is not below Gamma/m = {limit}")]
    HypothesisViolation {
        index: usize,
        value: Box<Rational>,
        limit: Box<Rational>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("refusing to run on a degenerate system (t = 0); perturb the polytope first")]
    DegeneracyHazard,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("n = {n} exceeds the size limit {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Input-side errors map to exit status 2 in the CLI.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::PerturbationOutOfRange { .. }
                | Error::InvalidDelta(_)
                | Error::DimensionMismatch { .. }
                | Error::SizeLimit { .. }
                | Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
