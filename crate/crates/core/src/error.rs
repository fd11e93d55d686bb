use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("missing column `{0}` in header")]
    MissingColumn(String),

    #[error("line {line}, column `{column}`: cannot parse {value:?}")]
    Parse {
        line: usize,
        column: String,
        value: String,
    },

    #[error("line {line}, column `{column}`: {message}")]
    Domain {
        line: usize,
        column: String,
        message: String,
    },

    #[error("line {line}: year {year} appears more than once")]
    DuplicateYear { line: usize, year: i32 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("dummy column `{0}` is identically zero in this data")]
    EmptyDummy(String),

    #[error("design is rank deficient: `{column}` is collinear with `{other}`")]
    RankDeficient { column: String, other: String },

    #[error("need more observations than columns (n = {n}, k = {k})")]
    InsufficientObservations { n: usize, k: usize },

    #[error("empty category: outcome level {0} never observed")]
    EmptyCategory(u32),

    #[error(
        "ordered probit did not converge after {iterations} iterations \
         (log-likelihood {loglik}, max |gradient| {max_gradient})"
    )]
    NonConvergence {
        iterations: usize,
        loglik: f64,
        max_gradient: f64,
    },

    #[error("likelihood appears unbounded (parameter norm {norm:.3e}); outcome is separated by the regressors")]
    Separation { norm: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("no year has at least {min_obs} usable observations")]
    NoQualifyingYear { min_obs: usize },

    #[error("year {0} has no macro record")]
    YearMismatch(i32),

    #[error("only {available} usable years, need at least {required}")]
    InsufficientYears { available: usize, required: usize },

    #[error("`{0}` and `{1}` are perfectly collinear and cannot be requested together")]
    Collinearity(String, String),

    #[error("invalid data-generating process: {0}")]
    InvalidDgp(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid specification file: {0}")]
    Json(#[from] serde_json::Error),
}
