//! Author ability estimation from coauthored publication data.
//!
//! Each author `i` carries a latent ability `a_i`, and a paper's log-quality
//! is modelled as the sum of its authors' log-abilities. Fitting that model by
//! least squares (optionally with `a_i ≥ 1`) yields abilities that can be
//! compared with classical citation indicators.

pub mod error;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use model::{build_matrix, find_inseparable_groups, Author, AuthorshipMatrix, Dataset, Publication};
pub use scalar::Scalar;
pub use solver::{
    gradient, initialize, objective, solve, AbilityVector, Initialization, LogTransform, Problem,
    SolveConfig, SolveDiagnostics, SolveMode, StopReason,
};

pub type AbilityVectorF64 = AbilityVector<f64>;
pub type SolveConfigF64 = SolveConfig<f64>;
pub type SolveDiagnosticsF64 = SolveDiagnostics<f64>;
pub type ProblemF64 = Problem<f64>;
pub type AuthorStatsF64 = metrics::AuthorStats<f64>;
pub type ComparisonReportF64 = metrics::ComparisonReport<f64>;
pub type HistogramF64 = metrics::Histogram<f64>;
