//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An odds-ratio vector implies a negative category probability for the
    /// given control distribution.
    #[error("odds ratios are inadmissible for this control distribution: category {category} would have probability {probability}")]
    NonMonotoneResult { category: usize, probability: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires draws from the {expected:?} model, got {got:?}")]
    WrongModel {
        expected: crate::inference::Model,
        got: crate::inference::Model,
    },

    /// MCMC acceptance rate collapsed after adaptation.
    #[error("chain degenerate: acceptance rate {rate} below 0.01 after adaptation")]
    ChainDegenerate { rate: f64 },

    /// Likelihood maximization did not converge (separation or sparse
    /// categories).
    #[error("frequentist fit failed: {reason}")]
    FitFailure { reason: String },

    /// A simulated trial could not be evaluated after the allowed reruns.
    #[error("trial invalid after {attempts} attempts: {source}")]
    TrialInvalid { attempts: usize, source: Box<Error> },

    #[error("model selection needs at least one retained draw per chain")]
    InsufficientDraws,

    #[error(
        "no cutoff pair on the grid achieves type I error <= {alpha}; smallest achieved was {best}"
    )]
    NoFeasiblePair { alpha: f64, best: f64 },

    #[error("power target {target} unreachable on the sample-size grid; best was {achieved} at n = {at_n}")]
    TargetUnreachable {
        target: f64,
        achieved: f64,
        at_n: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
