//! Posterior inference for the PO and NPO cumulative-logit models, the
//! decision criteria `pi` and `pi_U`, and a fast frequentist approximation.

mod frequentist;
pub mod likelihood;
mod mcmc;

pub use frequentist::{frequentist_prob_effective, frequentist_selects_npo};
pub use likelihood::{log_likelihood_npo, log_likelihood_po};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::UtilityScale;

/// Which cumulative-logit model a set of draws belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Po,
    Npo,
}

/// Prior specification.
///
/// Cutpoint priors are `Normal(0, cutpoint_var)` subject to the ordering
/// constraint. The default reads the conventional second argument of 0.1 as a
/// precision, i.e. variance 10; set `cutpoint_var = 0.1` directly for the
/// literal-variance interpretation. Treatment-effect priors are per-boundary
/// normals whose moments can be filled from historical data; the PO model
/// uses the first entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub mu_mean: f64,
    pub mu_var: f64,
    pub cutpoint_var: f64,
    pub delta_means: Vec<f64>,
    pub delta_vars: Vec<f64>,
}

impl PriorSpec {
    /// Defaults for `n_categories` levels: `mu ~ N(0,1)`, cutpoint variance
    /// 10, effect priors `N(0, 10)` per boundary.
    pub fn defaults(n_categories: usize) -> Self {
        let k = n_categories - 1;
        Self {
            mu_mean: 0.0,
            mu_var: 1.0,
            cutpoint_var: 10.0,
            delta_means: vec![0.0; k],
            delta_vars: vec![10.0; k],
        }
    }

    /// Same defaults but with a chosen effect-prior variance on every
    /// boundary.
    pub fn with_delta_var(n_categories: usize, delta_var: f64) -> Self {
        let mut p = Self::defaults(n_categories);
        p.delta_vars = vec![delta_var; n_categories - 1];
        p
    }

    pub fn validate(&self, n_categories: usize) -> Result<()> {
        let k = n_categories - 1;
        if self.delta_means.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: self.delta_means.len(),
            });
        }
        if self.delta_vars.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: self.delta_vars.len(),
            });
        }
        if self.mu_var <= 0.0
            || self.cutpoint_var <= 0.0
            || self.delta_vars.iter().any(|&v| v <= 0.0)
        {
            return Err(Error::InvalidConfig(
                "prior variances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Observed category counts for one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmData {
    counts: Vec<u64>,
}

impl ArmData {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 outcome levels, got {}",
                counts.len()
            )));
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::InvalidConfig("arm has no observations".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn n_categories(&self) -> usize {
        self.counts.len()
    }
}

/// Paired control and treatment arm counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialData {
    pub control: ArmData,
    pub treatment: ArmData,
}

impl TrialData {
    pub fn new(control: ArmData, treatment: ArmData) -> Result<Self> {
        if control.n_categories() != treatment.n_categories() {
            return Err(Error::DimensionMismatch {
                expected: control.n_categories(),
                got: treatment.n_categories(),
            });
        }
        Ok(Self { control, treatment })
    }

    pub fn n_categories(&self) -> usize {
        self.control.n_categories()
    }

    /// Element-wise pooling of two stages of the same trial.
    pub fn pooled_with(&self, later: &TrialData) -> Result<TrialData> {
        if self.n_categories() != later.n_categories() {
            return Err(Error::DimensionMismatch {
                expected: self.n_categories(),
                got: later.n_categories(),
            });
        }
        let add = |a: &ArmData, b: &ArmData| {
            ArmData::new(
                a.counts()
                    .iter()
                    .zip(b.counts())
                    .map(|(x, y)| x + y)
                    .collect(),
            )
        };
        TrialData::new(
            add(&self.control, &later.control)?,
            add(&self.treatment, &later.treatment)?,
        )
    }
}

/// Sampler settings. `fix_mu` pins the location at zero, removing the soft
/// non-identifiability between `mu` and the cutpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub n_burn: usize,
    pub n_keep: usize,
    pub step_mu: f64,
    pub step_gamma: f64,
    pub step_delta: f64,
    pub adapt: bool,
    pub fix_mu: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_burn: 1000,
            n_keep: 2000,
            step_mu: 0.4,
            step_gamma: 0.4,
            step_delta: 0.4,
            adapt: true,
            fix_mu: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_burn == 0 || self.n_keep == 0 {
            return Err(Error::InvalidConfig(
                "n_burn and n_keep must be at least 1".into(),
            ));
        }
        if self.step_mu <= 0.0 || self.step_gamma <= 0.0 || self.step_delta <= 0.0 {
            return Err(Error::InvalidConfig("step sizes must be positive".into()));
        }
        Ok(())
    }
}

/// Retained MCMC draws. Each row holds `(mu, gamma_1..gamma_{C-1}, effect)`
/// where the effect is one column for PO and `C - 1` columns for NPO. Every
/// retained row satisfies the cutpoint ordering.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    model: Model,
    n_categories: usize,
    n_keep: usize,
    draws: Vec<f64>,
    pub acceptance_rate: f64,
}

impl PosteriorDraws {
    pub(crate) fn from_raw(
        model: Model,
        n_categories: usize,
        n_keep: usize,
        draws: Vec<f64>,
        acceptance_rate: f64,
    ) -> Self {
        Self {
            model,
            n_categories,
            n_keep,
            draws,
            acceptance_rate,
        }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn n_draws(&self) -> usize {
        self.n_keep
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    fn n_params(&self) -> usize {
        let k = self.n_categories - 1;
        match self.model {
            Model::Po => 1 + k + 1,
            Model::Npo => 1 + 2 * k,
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.n_params();
        &self.draws[i * w..(i + 1) * w]
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.row(i)[0]
    }

    pub fn gamma(&self, i: usize) -> &[f64] {
        &self.row(i)[1..self.n_categories]
    }

    /// Effect columns: length 1 for PO, `C - 1` for NPO.
    pub fn effect(&self, i: usize) -> &[f64] {
        &self.row(i)[self.n_categories..]
    }
}

/// Draw from the posterior of `model` given two-arm data.
///
/// Fails with [`Error::ChainDegenerate`] when the post-adaptation acceptance
/// rate collapses below 1%.
pub fn fit<R: Rng + ?Sized>(
    data: &TrialData,
    model: Model,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<PosteriorDraws> {
    priors.validate(data.n_categories())?;
    cfg.validate()?;
    mcmc::run_chain(data, model, priors, cfg, rng)
}

/// `pi = Pr(effect < 0 | data)` under the PO model: the fraction of retained
/// draws whose log-odds shift favors the treatment.
pub fn prob_effective_po(draws: &PosteriorDraws) -> Result<f64> {
    if draws.model() != Model::Po {
        return Err(Error::WrongModel {
            expected: Model::Po,
            got: draws.model(),
        });
    }
    let n = draws.n_draws();
    let hits = (0..n).filter(|&i| draws.effect(i)[0] < 0.0).count();
    Ok(hits as f64 / n as f64)
}

/// `pi_U = Pr(mean utility of treatment > mean utility of control | data)`
/// under the NPO model. Both arms' category probabilities are model-implied
/// from each retained draw.
pub fn prob_effective_npo(draws: &PosteriorDraws, scale: &UtilityScale) -> Result<f64> {
    if draws.model() != Model::Npo {
        return Err(Error::WrongModel {
            expected: Model::Npo,
            got: draws.model(),
        });
    }
    if scale.len() != draws.n_categories() {
        return Err(Error::DimensionMismatch {
            expected: draws.n_categories(),
            got: scale.len(),
        });
    }
    let n = draws.n_draws();
    let u = scale.values();
    let mut hits = 0usize;
    for i in 0..n {
        let mu = draws.mu(i);
        let gamma = draws.gamma(i);
        let delta = draws.effect(i);
        let ctr = likelihood::category_probs(mu, gamma, likelihood::Shift::None)
            .expect("retained draw is admissible");
        let trt = likelihood::category_probs(mu, gamma, likelihood::Shift::PerBoundary(delta))
            .expect("retained draw is admissible");
        let u_ctr: f64 = ctr.iter().zip(u).map(|(p, w)| p * w).sum();
        let u_trt: f64 = trt.iter().zip(u).map(|(p, w)| p * w).sum();
        if u_trt > u_ctr {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}
