//! Crate-wide error type.

use std::path::PathBuf;

/// Everything that can go wrong across the pipeline.
///
/// Variants are grouped by the stage that raises them; the CLI maps
/// [`Error::class`] onto its exit-code taxonomy.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix or vector had the wrong width for the operation.
    #[error("shape mismatch in {context}: expected width {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Two summary bundles cannot be combined (different design width or
    /// intercept convention).
    #[error("incompatible summaries: {reason}")]
    IncompatibleSummaries { reason: String },

    /// An input file could not be opened or read.
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A selected field failed to parse as a finite number.
    #[error("non-numeric field {value:?} in {file} at row {row}, column {column}")]
    NonNumericField {
        file: String,
        row: u64,
        column: usize,
        value: String,
    },

    /// A data row had fewer columns than the configuration selects.
    #[error("row {row} of {file} has {found} columns, need at least {needed}")]
    TooFewColumns {
        file: String,
        row: u64,
        found: usize,
        needed: usize,
    },

    /// Invalid ingestion/simulation/chain configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Persisted-statistics file carries an unsupported schema version.
    #[error("unsupported statistics schema version {found} (supported: {supported})")]
    SchemaVersion { found: u64, supported: u64 },

    /// Persisted-statistics file is malformed or truncated.
    #[error("corrupt statistics file {path}: {reason}")]
    CorruptStatsFile { path: PathBuf, reason: String },

    /// A loaded `xtx` block was not symmetric.
    #[error("statistics file {path}: xtx[{i}][{j}] != xtx[{j}][{i}] ({a} vs {b})")]
    AsymmetricStats {
        path: PathBuf,
        i: usize,
        j: usize,
        a: f64,
        b: f64,
    },

    /// A matrix expected to be symmetric positive definite failed its
    /// Cholesky factorization.
    #[error("matrix is not positive definite: pivot {pivot} is {value:.3e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// A matrix expected to be symmetric was not.
    #[error("matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    /// `XᵀX` is singular under the flat β prior.
    #[error(
        "XᵀX is rank deficient (pivot {pivot}); the flat prior requires full column rank: \
         drop collinear predictors or use an informative prior (mvnorm-known/mvnorm-unknown)"
    )]
    RankDeficient { pivot: usize },

    /// A distribution parameter was outside its domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// The residual quadratic came out negative beyond rounding tolerance,
    /// meaning the statistics are mutually inconsistent.
    #[error("inconsistent statistics: residual quadratic {value:.6e} is negative beyond tolerance {tolerance:.6e}")]
    InconsistentStatistics { value: f64, tolerance: f64 },

    /// The σ² conditional would have a non-positive rate.
    #[error("degenerate data: σ² conditional rate {0} is not positive")]
    DegenerateData(f64),

    /// A supplied precomputed factor does not reproduce `XᵀX`.
    #[error("precomputed XᵀX factor fails multiply-back at ({i},{j}): |{got} - {expected}| exceeds tolerance")]
    FactorMismatch {
        i: usize,
        j: usize,
        got: f64,
        expected: f64,
    },

    /// An error raised inside a Gibbs iteration, tagged with its index.
    #[error("gibbs iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// Burn-in must be smaller than the chain length.
    #[error("burn-in {burn_in} must be smaller than the number of draws {draws}")]
    BurnInTooLarge { burn_in: usize, draws: usize },

    /// Too few retained draws to summarize.
    #[error("need at least 2 retained draws, got {0}")]
    TooFewDraws(usize),

    /// A requested quantile is not available in a summary.
    #[error("quantile for probability {0} is not present in the summary")]
    MissingQuantile(f64),
}

/// Coarse classification used by the CLI exit-code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration the user can fix by changing flags.
    Usage,
    /// Bad data, bad files, shape mismatches.
    Data,
    /// Numerical failure (factorization, domain, degeneracy).
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidConfig(_) => ErrorClass::Usage,
            ShapeMismatch { .. }
            | IncompatibleSummaries { .. }
            | Io { .. }
            | NonNumericField { .. }
            | TooFewColumns { .. }
            | SchemaVersion { .. }
            | CorruptStatsFile { .. }
            | AsymmetricStats { .. }
            | NotSymmetric { .. }
            | BurnInTooLarge { .. }
            | TooFewDraws(_)
            | MissingQuantile(_) => ErrorClass::Data,
            NotPositiveDefinite { .. }
            | RankDeficient { .. }
            | Domain(_)
            | InconsistentStatistics { .. }
            | DegenerateData(_)
            | FactorMismatch { .. } => ErrorClass::Numeric,
            AtIteration { source, .. } => source.class(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
