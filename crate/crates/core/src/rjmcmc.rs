//! PO/NPO model selection from interim data via palette post-processing.
//!
//! A universal parameter ("palette") `psi` of length `C - 1` carries the
//! treatment-effect information of both candidate models. The NPO parameters
//! are `psi` itself; the PO parameters are recovered through a linear
//! bijection whose forward map takes the palette mean as the common shift and
//! whose supplemental coordinates `u` pad the dimension. Model moves are
//! Gibbs draws from the two-point conditional built from the full-data
//! likelihood, the palette prior mapped through each bijection (with its
//! Jacobian), and the model prior. Retained draws from the two single-model
//! chains are recycled as the palette proposals, so this runs entirely as a
//! post-processing step.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::likelihood::{log_likelihood_npo, log_likelihood_po};
use crate::inference::{Model, PosteriorDraws, PriorSpec, TrialData};
use crate::math::{log_sum_exp2, normal_log_pdf};

/// Palette vector of length `C - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette(pub Vec<f64>);

impl Palette {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// NPO parameters from the palette: the identity map.
pub fn g1(psi: &Palette) -> Vec<f64> {
    psi.0.clone()
}

/// PO parameters from the palette: the common shift is the palette mean and
/// the supplemental vector is `u_c = mean - psi_{c+1}`.
pub fn g2(psi: &Palette) -> (f64, Vec<f64>) {
    let mean = psi.mean();
    let u = psi.0[1..].iter().map(|p| mean - p).collect();
    (mean, u)
}

/// Inverse of [`g2`]: `psi_1 = delta + sum(u)`, `psi_{c+1} = delta - u_c`.
pub fn g2_inverse(delta: f64, u: &[f64]) -> Palette {
    let mut psi = Vec::with_capacity(u.len() + 1);
    psi.push(delta + u.iter().sum::<f64>());
    psi.extend(u.iter().map(|uc| delta - uc));
    Palette(psi)
}

/// |det d g_k / d psi|: 1 for the identity map, `1 / (C - 1)` for the linear
/// PO map.
pub fn jacobian_magnitude(model: Model, n_categories: usize) -> f64 {
    assert!(n_categories >= 3, "need at least 3 categories");
    match model {
        Model::Npo => 1.0,
        Model::Po => 1.0 / (n_categories - 1) as f64,
    }
}

/// Log prior density of the palette under each model, mapped through the
/// corresponding bijection and its Jacobian.
///
/// NPO: the per-boundary effect priors evaluated at the palette itself.
/// PO: the scalar effect prior at the palette mean, pseudo-priors
/// `Normal(0, pseudo_prior_var)` on the supplemental coordinates, and the
/// Jacobian term.
pub fn palette_log_prior(
    psi: &Palette,
    model: Model,
    priors: &PriorSpec,
    pseudo_prior_var: f64,
) -> f64 {
    assert!(pseudo_prior_var > 0.0);
    let k = psi.len();
    match model {
        Model::Npo => psi
            .0
            .iter()
            .enumerate()
            .map(|(c, &p)| normal_log_pdf(p, priors.delta_means[c], priors.delta_vars[c]))
            .sum(),
        Model::Po => {
            let (delta, u) = g2(psi);
            let mut lp = normal_log_pdf(delta, priors.delta_means[0], priors.delta_vars[0]);
            for &uc in &u {
                lp += normal_log_pdf(uc, 0.0, pseudo_prior_var);
            }
            lp + (1.0 / k as f64).ln()
        }
    }
}

/// Settings for [`select_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RjConfig {
    /// Prior probability of the PO model; the NPO prior is the complement.
    pub model_prior_po: f64,
    /// Variance of the pseudo-prior on the supplemental coordinates. Affects
    /// mixing only, not the target, since the same density generates and
    /// weighs them.
    pub pseudo_prior_var: f64,
    pub n_sweeps: usize,
}

impl Default for RjConfig {
    fn default() -> Self {
        Self {
            model_prior_po: 0.5,
            pseudo_prior_var: 1.0,
            n_sweeps: 2000,
        }
    }
}

impl RjConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.model_prior_po) {
            return Err(Error::InvalidConfig(
                "model prior must lie in [0, 1]".into(),
            ));
        }
        if self.pseudo_prior_var <= 0.0 {
            return Err(Error::InvalidConfig(
                "pseudo-prior variance must be positive".into(),
            ));
        }
        if self.n_sweeps == 0 {
            return Err(Error::InvalidConfig("need at least one sweep".into()));
        }
        Ok(())
    }
}

/// Outcome of the model-selection pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelChoice {
    pub selected: Model,
    /// NPO visit share across sweeps.
    pub posterior_prob_npo: f64,
    pub visits_po: usize,
    pub visits_npo: usize,
}

/// Alternate palette refreshes and model moves for `n_sweeps` sweeps over the
/// retained draws of both single-model chains, fitted to the same data.
///
/// Under the NPO state the palette is the next NPO effect draw; under the PO
/// state it is `g2_inverse` of the next PO effect draw with supplemental
/// coordinates refreshed from the pseudo-prior. The model move samples from
/// the two-point conditional whose weights combine the full-data likelihood
/// at the mapped parameters (cutpoints and location carried from the
/// originating draw), the palette prior, and the model prior. Ties in the
/// final visit count go to the more flexible NPO model.
pub fn select_model<R: Rng + ?Sized>(
    draws_po: &PosteriorDraws,
    draws_npo: &PosteriorDraws,
    data: &TrialData,
    priors: &PriorSpec,
    cfg: &RjConfig,
    rng: &mut R,
) -> Result<ModelChoice> {
    cfg.validate()?;
    if draws_po.model() != Model::Po {
        return Err(Error::WrongModel {
            expected: Model::Po,
            got: draws_po.model(),
        });
    }
    if draws_npo.model() != Model::Npo {
        return Err(Error::WrongModel {
            expected: Model::Npo,
            got: draws_npo.model(),
        });
    }
    if draws_po.n_draws() == 0 || draws_npo.n_draws() == 0 {
        return Err(Error::InsufficientDraws);
    }
    let k = data.n_categories() - 1;
    priors.validate(data.n_categories())?;

    let log_prior_po = cfg.model_prior_po.ln();
    let log_prior_npo = (1.0 - cfg.model_prior_po).ln();

    let mut state = if cfg.model_prior_po > 0.5 {
        Model::Po
    } else {
        Model::Npo
    };
    let mut cursor_po = 0usize;
    let mut cursor_npo = 0usize;
    let mut visits_npo = 0usize;

    for _ in 0..cfg.n_sweeps {
        // Step 1: refresh the palette given the current model.
        let (psi, mu, gamma): (Palette, f64, Vec<f64>) = match state {
            Model::Npo => {
                let i = cursor_npo % draws_npo.n_draws();
                cursor_npo += 1;
                (
                    Palette(draws_npo.effect(i).to_vec()),
                    draws_npo.mu(i),
                    draws_npo.gamma(i).to_vec(),
                )
            }
            Model::Po => {
                let i = cursor_po % draws_po.n_draws();
                cursor_po += 1;
                let delta = draws_po.effect(i)[0];
                let sd = cfg.pseudo_prior_var.sqrt();
                let u: Vec<f64> = (0..k - 1)
                    .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                (
                    g2_inverse(delta, &u),
                    draws_po.mu(i),
                    draws_po.gamma(i).to_vec(),
                )
            }
        };

        // Step 2: two-point conditional for the model indicator.
        let lw_npo = log_likelihood_npo(data, mu, &gamma, &psi.0)
            + palette_log_prior(&psi, Model::Npo, priors, cfg.pseudo_prior_var)
            + log_prior_npo;
        let delta_po = psi.mean();
        let lw_po = log_likelihood_po(data, mu, &gamma, delta_po)
            + palette_log_prior(&psi, Model::Po, priors, cfg.pseudo_prior_var)
            + log_prior_po;
        let denom = log_sum_exp2(lw_npo, lw_po);
        let p_npo = if denom == f64::NEG_INFINITY {
            // Both weights vanished (can only happen with a degenerate model
            // prior and an inadmissible mapped point); hold the current state.
            match state {
                Model::Npo => 1.0,
                Model::Po => 0.0,
            }
        } else {
            (lw_npo - denom).exp()
        };
        assert!(
            (0.0..=1.0).contains(&p_npo),
            "conditional model probability {p_npo} outside [0, 1]"
        );
        let coin: f64 = rng.random();
        state = if coin < p_npo { Model::Npo } else { Model::Po };
        if state == Model::Npo {
            visits_npo += 1;
        }
    }

    let posterior_prob_npo = visits_npo as f64 / cfg.n_sweeps as f64;
    Ok(ModelChoice {
        selected: if posterior_prob_npo >= 0.5 {
            Model::Npo
        } else {
            Model::Po
        },
        posterior_prob_npo,
        visits_po: cfg.n_sweeps - visits_npo,
        visits_npo,
    })
}
