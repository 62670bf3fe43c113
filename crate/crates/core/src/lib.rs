//! Simulation and inference engine for two-arm, two-stage Bayesian group
//! sequential trials with ordinal endpoints.
//!
//! Three designs are supported:
//!
//! * **PO** — a proportional-odds cumulative-logit model with a single
//!   log-odds-ratio treatment effect, monitored through
//!   `pi = Pr(effect favors treatment | data)`.
//! * **NPO** — a non-proportional-odds model with one log-odds shift per
//!   category boundary, monitored through the posterior probability that the
//!   treatment's mean utility exceeds the control's.
//! * **SWITCH** — a two-stage design that selects PO vs NPO from interim data
//!   via reversible-jump MCMC (palette post-processing) and sizes and analyzes
//!   stage 2 under the chosen model.
//!
//! The engine covers data generation, posterior inference (random-walk
//! Metropolis within Gibbs), a fast frequentist approximation, model
//! selection, operating-characteristic simulation, cutoff calibration, and
//! sample-size search. All randomness flows through explicit seeded streams;
//! every result is reproducible bit-for-bit from its configuration.

pub mod calibration;
pub mod error;
pub mod inference;
pub mod math;
pub mod ordinal;
pub mod rjmcmc;
pub mod trial;

pub use error::Error;
pub use inference::{ArmData, McmcConfig, Model, PosteriorDraws, PriorSpec, TrialData};
pub use ordinal::{CategoryDistribution, EffectSpec, Scenario, UtilityScale};
pub use trial::{Design, DesignConfig, Method, OperatingCharacteristics, TrialOutcome};
