//! Bayesian linear regression on mergeable sufficient statistics.
//!
//! The normal-errors regression model `Y = Xβ + ε`, `ε ~ Normal(0, σ²)`,
//! admits full conditional posteriors that depend on the data only through
//! `XᵀX`, `XᵀY`, `YᵀY` and the row count `n`. Those four quantities are
//! additive over horizontal slices of the data, so they can be accumulated
//! from a file of any size in fixed-size chunks, persisted, and updated
//! later when more rows arrive; the complete data set never has to fit in
//! memory.
//!
//! The crate is organized around that observation:
//!
//! - [`summaries`] streams delimited files in bounded-memory chunks and
//!   folds them into [`summaries::SummaryStatistics`], the mergeable bundle
//!   everything else consumes. Statistics can be saved, loaded, and updated.
//! - [`conditionals`] is the pure algebra: given statistics, a prior, and
//!   the current parameter values, it computes the parameters of each full
//!   conditional posterior.
//! - [`distributions`] provides seeded, reproducible sampling from the
//!   families the sampler needs (multivariate normal, Wishart, inverse
//!   gamma).
//! - [`gibbs`] drives the Gibbs sampler over a chosen prior configuration
//!   and returns every posterior draw.
//! - [`posterior`] turns draws into summaries (mean, SD, naive SE,
//!   quantiles, credible intervals) and writes draw/summary/plot-data files.
//! - [`simulate`] generates synthetic regression data with correlated
//!   predictors, streamed to disk in bounded memory.

pub mod conditionals;
pub mod distributions;
pub mod error;
pub mod gibbs;
pub mod linalg;
pub mod posterior;
pub mod simulate;
pub mod summaries;

pub use error::Error;
