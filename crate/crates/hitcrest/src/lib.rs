//! Bivariate first-hitting-time survival model with dependent censoring.
//!
//! Two latent compound Poisson processes share one Poisson jump clock of
//! intensity `lambda`; each accumulates its own i.i.d. nonnegative jump
//! sizes. The event time `T` is the first instant the first process reaches
//! a threshold `x`, the censoring time `C` the first instant the second
//! process reaches `z`. Because the clock is shared, `T` and `C` are
//! dependent and `P[T = C] > 0` in general.
//!
//! The observable is `(Y, Delta)` with `Y = min(T, C)`. Under Model I,
//! `Delta` is `1{T <= C}`; under Model II ties are kept separate
//! (`Delta = 2` when `T = C`, `1` when `T < C`, `0` when `T > C`).
//!
//! Everything observable has a closed form in terms of the crossing
//! coefficients `c_n = P[first n jumps sum strictly below the threshold]`
//! and Poisson-weighted series in `lambda * t`, which this crate evaluates
//! in log space with adaptive truncation. On top of these primitives sit
//! exact forward simulation, maximum-likelihood fitting with a sandwich
//! covariance, identifiability diagnostics, a Monte-Carlo replication
//! study runner, and the `hitcrest` command-line front end.

pub mod cli;
pub mod inference;
pub mod jump;
pub mod model;
pub mod series;
pub mod simulate;
pub mod study;

pub use inference::{
    fit, identifiability_report, information_matrices, log_likelihood,
    predicted_prob_uncensored, sandwich_covariance, wald_interval, FitOptions, FitResult,
    FitTemplate, Hypothesis, IdentifiabilityReport, InfoMatrices, ParamVector,
};
pub use jump::{CoefficientTable, FamilyClass, JumpFamily};
pub use model::{Margin, ModelSpec, Observation, OutcomeMasses, Variant};
pub use series::{poisson_mixture, SeriesControl};
pub use simulate::{simulate_dataset, simulate_outcome, LatentTrace};
pub use study::{
    curve_export, default_t_grid, run_study, CurvePoint, EmpiricalCdf, ReplicateRecord,
    SizeSummary, StudyConfig, StudyResult,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series truncated after {terms} terms (t = {t}): tail bound {tail:e} above tolerance")]
    Truncation { t: f64, terms: usize, tail: f64 },
    #[error("survival underflowed at t = {0}; ratio not representable")]
    Underflow(f64),
    #[error("jump cap of {cap} reached before both thresholds were crossed")]
    JumpCap { cap: usize },
    #[error("empty data")]
    EmptyData,
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("study failure: {0}")]
    StudyFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
