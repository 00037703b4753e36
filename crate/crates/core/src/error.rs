use thiserror::Error;

use crate::filter::RunTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate {kind} {simplex:?}")]
    DuplicateSimplex { kind: &'static str, simplex: Vec<usize> },

    #[error("triangle {triangle:?} is missing its face {face:?}")]
    MissingFace { triangle: [usize; 3], face: [usize; 2] },

    #[error("simplex {simplex:?} references node {index} but the complex has {node_count} nodes")]
    IndexOutOfRange {
        simplex: Vec<usize>,
        index: usize,
        node_count: usize,
    },

    #[error("simplex {0:?} repeats a node")]
    DegenerateSimplex(Vec<usize>),

    #[error("invalid order {order} for {what}")]
    InvalidOrder { order: usize, what: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("link ({0}, {1}) is not part of the complex")]
    UnknownLink(usize, usize),

    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),

    #[error("eigenvalue {0} is degenerate")]
    DegenerateSelection(f64),

    #[error("no eigenvalue matches the selector: {0}")]
    NoSuchEigenvalue(String),

    #[error("operator has no nonzero eigenvalues")]
    EmptySpectrum,

    #[error("signal vanishes after projection onto the image of the Dirac operator")]
    ZeroAfterProjection,

    #[error("the image of the Dirac operator of order {0} is trivial")]
    EmptyImage(usize),

    #[error("noise vector is zero")]
    ZeroNoise,

    #[error("signal is zero")]
    ZeroSignal,

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("no convergence after {} iterations", .0.iterations)]
    NonConvergence(Box<RunTrace>),

    #[error("invalid flavor {0}; expected -1, 0 or 1")]
    InvalidFlavor(i32),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::DuplicateSimplex { .. } => "DuplicateSimplex",
            Error::MissingFace { .. } => "MissingFace",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DegenerateSimplex(_) => "DegenerateSimplex",
            Error::InvalidOrder { .. } => "InvalidOrder",
            Error::DimensionMismatch { .. } | Error::UnknownLink(..) => "DimensionMismatch",
            Error::EigensolveFailure(_) => "EigensolveFailure",
            Error::DegenerateSelection(_) => "DegenerateSelection",
            Error::NoSuchEigenvalue(_) => "NoSuchEigenvalue",
            Error::EmptySpectrum => "EmptySpectrum",
            Error::ZeroAfterProjection => "ZeroAfterProjection",
            Error::EmptyImage(_) => "EmptyImage",
            Error::ZeroNoise => "ZeroNoise",
            Error::ZeroSignal => "ZeroSignal",
            Error::SolverFailure(_) => "SolverFailure",
            Error::NonConvergence(_) => "NonConvergence",
            Error::InvalidFlavor(_) => "InvalidFlavor",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
