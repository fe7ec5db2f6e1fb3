//! Variance decomposition of retrieval measures and SNK mean comparison.

mod glm;
mod ptukey;
mod snk;

use thiserror::Error;

pub use glm::{fit_additive, fit_additive_model, fit_level_model, FactorFit, FactorKind, FactorSpec, GlmFit};
pub use ptukey::{studentized_range_cdf, studentized_range_quantile, Df};
pub use snk::{snk_compare, QuantileCache, SnkEntry, SnkGrouping};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no observations to fit")]
    NoObservations,
    #[error("{factor} level {level:?} has no observations")]
    EmptyLevel { factor: &'static str, level: String },
    #[error("factor {factor} has a single level")]
    SingleLevel { factor: &'static str },
    #[error("factor {factor} is not part of the fit")]
    MissingFactor { factor: &'static str },
    #[error("rank-deficient design: {n_obs} observations, {n_params} parameters")]
    RankDeficient { n_obs: usize, n_params: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{what} did not converge ({detail})")]
    NoConvergence { what: &'static str, detail: String },
}
