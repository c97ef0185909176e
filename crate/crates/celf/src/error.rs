//! Crate-wide error type.

use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by any stage of the pipeline.
#[derive(Debug)]
pub enum Error {
    /// An operation that needs at least one link received none.
    EmptyLinkSet,
    /// A link with coincident endpoints (zero distance) was constructed.
    DegenerateLink { id: String },
    /// A numeric input was NaN or infinite.
    NonFinite { what: String },
    /// A parameter violated its domain (value and requirement reported).
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// Regression is singular: fewer than two links or all at one distance.
    SingularRegression { detail: &'static str },
    /// Carrier frequency outside the model's 150-1500 MHz validity range.
    FrequencyOutOfRange { mhz: f64 },
    /// A dense matrix would exceed the configured memory budget.
    MemoryBudget {
        required_bytes: u64,
        budget_bytes: u64,
    },
    /// Cholesky factorization failed (after any jitter retry).
    Factorization { context: &'static str, detail: String },
    /// Structural CSV problem: bad header, wrong field count, unparseable cell.
    Csv { line: usize, message: String },
    /// A CSV file contained no data rows.
    EmptyDataset,
    /// Malformed key=value file (config, scenario, or model header).
    Config { message: String },
    /// Malformed model file.
    ModelFile { line: usize, message: String },
    /// Hyperparameter grid has more combinations than the configured budget.
    GridTooLarge { combinations: usize, budget: usize },
    /// Grouped-variance analysis needs a tag that no row carries.
    MissingGroup { group: &'static str },
    /// Cross-validation needs more data per fold.
    InsufficientData { per_fold: usize, required: usize },
    /// Invalid cross-validation specification.
    InvalidGridSearch { message: String },
    /// Unknown scenario preset name.
    UnknownPreset { name: String, available: String },
    /// Invalid synthetic scenario.
    Scenario { message: String },
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyLinkSet => write!(f, "no links provided"),
            Error::DegenerateLink { id } => {
                write!(f, "link '{id}' has coincident endpoints (zero distance)")
            }
            Error::NonFinite { what } => write!(f, "{what} must be finite"),
            Error::InvalidParameter {
                name,
                value,
                requirement,
            } => write!(f, "parameter {name} = {value} violates: {requirement}"),
            Error::SingularRegression { detail } => {
                write!(f, "path-loss regression is singular: {detail}")
            }
            Error::FrequencyOutOfRange { mhz } => {
                write!(f, "frequency {mhz} MHz outside the 150-1500 MHz model range")
            }
            Error::MemoryBudget {
                required_bytes,
                budget_bytes,
            } => write!(
                f,
                "dense covariance needs {required_bytes} bytes, budget is {budget_bytes} \
                 (raise the memory budget or coarsen the grid)"
            ),
            Error::Factorization { context, detail } => {
                write!(f, "Cholesky factorization failed in {context}: {detail}")
            }
            Error::Csv { line, message } => write!(f, "line {line}: {message}"),
            Error::EmptyDataset => write!(f, "file contains no data rows"),
            Error::Config { message } => write!(f, "{message}"),
            Error::ModelFile { line, message } => {
                write!(f, "model file line {line}: {message}")
            }
            Error::GridTooLarge {
                combinations,
                budget,
            } => write!(
                f,
                "hyperparameter grid has {combinations} combinations, budget is {budget}"
            ),
            Error::MissingGroup { group } => {
                write!(f, "no rows tagged '{group}'; grouped variance unavailable")
            }
            Error::InsufficientData { per_fold, required } => write!(
                f,
                "only {per_fold} links per fold, need at least {required}"
            ),
            Error::InvalidGridSearch { message } => write!(f, "{message}"),
            Error::UnknownPreset { name, available } => {
                write!(f, "unknown preset '{name}' (available: {available})")
            }
            Error::Scenario { message } => write!(f, "{message}"),
            Error::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
