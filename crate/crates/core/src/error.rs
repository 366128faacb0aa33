use thiserror::Error;

/// Errors raised by symbol analysis, mode construction and the numerical substrate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point x = {x} lies outside the coefficient domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },
    #[error("leading coefficient vanishes near x = {x} (ellipticity violated)")]
    NotElliptic { x: f64 },
    #[error("symbol has a turning point: d sigma / d xi = 0 at (u = {u}, xi = {xi})")]
    SingularPoint { u: f64, xi: f64 },
    #[error("phase-space point (u = {u}, xi = {xi}) is not in the region where the bracket is positive")]
    NotInOmega { u: f64, xi: f64 },
    #[error("square-root branch point: w vanishes at offset s = {s}")]
    BranchPoint { s: f64 },
    #[error("no cutoff radius in the ladder satisfies the decay conditions: {0}")]
    NoCutoff(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            Error::Numeric(_) => 4,
            _ => 3,
        }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::NotElliptic { .. } => "not_elliptic",
            Error::SingularPoint { .. } => "singular_point",
            Error::NotInOmega { .. } => "not_in_omega",
            Error::BranchPoint { .. } => "branch_point",
            Error::NoCutoff(_) => "no_cutoff",
            Error::Degenerate(_) => "degenerate",
            Error::Precondition(_) => "precondition",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
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

pub type Result<T> = std::result::Result<T, Error>;
