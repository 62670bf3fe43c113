//! Ordinal outcome distributions, cumulative odds-ratio transforms, utility
//! scores, and the built-in simulation scenario catalog.
//!
//! Outcome level 1 is the most desirable and level C the least. A treatment
//! benefit shifts probability mass toward lower levels, which raises every
//! cumulative probability. Scenario odds ratios are expressed on that scale:
//! `OR_c = odds(treatment at-or-below c) / odds(control at-or-below c)`, so
//! `OR > 1` means benefit. On the latent cumulative-logit scale this is
//! `OR = exp(-delta)` with `delta < 0` for benefit.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::logit;

/// Probability vector over `C >= 3` ordered outcome levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    probs: Vec<f64>,
}

impl CategoryDistribution {
    /// Build from category probabilities. Requires `C >= 3`, entries in
    /// `[0, 1]`, and a total of 1 within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 outcome levels, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "probability {p} at level {} is outside [0, 1]",
                    i + 1
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn n_categories(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative probabilities: partial sums ending exactly at 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Last entry is 1 by the sum invariant; pin it against rounding.
        *out.last_mut().unwrap() = 1.0;
        out
    }

    /// Draw multinomial category counts for `n` subjects.
    ///
    /// Uses the conditional-binomial decomposition, so cost is O(C)
    /// independent of `n`. Deterministic given the random stream.
    pub fn sample_counts<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.probs.len()];
        let mut remaining = n;
        let mut mass_left = 1.0;
        for (c, &p) in self.probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if c + 1 == self.probs.len() {
                counts[c] = remaining;
                break;
            }
            let cond = (p / mass_left).clamp(0.0, 1.0);
            let draw = if cond >= 1.0 {
                remaining
            } else if cond <= 0.0 {
                0
            } else {
                Binomial::new(remaining, cond).unwrap().sample(rng)
            };
            counts[c] = draw;
            remaining -= draw;
            mass_left -= p;
        }
        counts
    }
}

/// Treatment effect as a vector of `C - 1` cumulative odds ratios, one per
/// category boundary. Entries above 1 favor the treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    odds_ratios: Vec<f64>,
}

impl EffectSpec {
    pub fn new(odds_ratios: Vec<f64>) -> Result<Self> {
        if odds_ratios.is_empty() {
            return Err(Error::InvalidConfig("empty odds-ratio vector".into()));
        }
        for &or in &odds_ratios {
            if or <= 0.0 || !or.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "odds ratio {or} must be positive and finite"
                )));
            }
        }
        Ok(Self { odds_ratios })
    }

    /// A single odds ratio replicated across all `n_categories - 1`
    /// boundaries (the proportional-odds case).
    pub fn proportional(or: f64, n_categories: usize) -> Result<Self> {
        Self::new(vec![or; n_categories.saturating_sub(1)])
    }

    pub fn odds_ratios(&self) -> &[f64] {
        &self.odds_ratios
    }

    pub fn n_boundaries(&self) -> usize {
        self.odds_ratios.len()
    }

    /// True iff all boundary odds ratios are equal.
    pub fn is_proportional(&self) -> bool {
        self.odds_ratios.iter().all(|&or| or == self.odds_ratios[0])
    }

    /// Per-boundary log odds-ratio shifts on the latent scale
    /// (`delta_c = -ln OR_c`; negative for benefit).
    pub fn log_odds_shifts(&self) -> Vec<f64> {
        self.odds_ratios.iter().map(|or| -or.ln()).collect()
    }
}

/// Apply boundary-wise cumulative odds ratios to a control distribution:
/// `odds(Q_c) = OR_c * odds(P_c)`, then difference the cumulative result back
/// into category probabilities.
///
/// Fails with [`Error::NonMonotoneResult`] when the implied cumulative
/// probabilities are not monotone, i.e. the odds-ratio vector is inadmissible
/// for this control distribution.
pub fn apply_odds_ratios(
    control: &CategoryDistribution,
    effect: &EffectSpec,
) -> Result<CategoryDistribution> {
    let c = control.n_categories();
    if effect.n_boundaries() != c - 1 {
        return Err(Error::DimensionMismatch {
            expected: c - 1,
            got: effect.n_boundaries(),
        });
    }
    let cum = control.cumulative();
    for &p in &cum[..c - 1] {
        if p <= 0.0 || p >= 1.0 {
            return Err(Error::InvalidConfig(
                "control cumulative probability hits 0 or 1 before the last boundary; odds undefined".into(),
            ));
        }
    }
    let mut q_cum = Vec::with_capacity(c);
    for (b, &or) in effect.odds_ratios().iter().enumerate() {
        let odds = or * cum[b] / (1.0 - cum[b]);
        q_cum.push(odds / (1.0 + odds));
    }
    q_cum.push(1.0);

    let mut probs = Vec::with_capacity(c);
    let mut prev = 0.0;
    for (i, &q) in q_cum.iter().enumerate() {
        let p = q - prev;
        if p < 0.0 {
            return Err(Error::NonMonotoneResult {
                category: i + 1,
                probability: p,
            });
        }
        probs.push(p);
        prev = q;
    }
    // Guard against accumulated rounding before revalidating.
    let total: f64 = probs.iter().sum();
    let last = probs.len() - 1;
    probs[last] += 1.0 - total;
    CategoryDistribution::new(probs)
}

/// Clinician-assigned desirability per outcome level, non-increasing from the
/// best level to the worst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityScale {
    u: Vec<f64>,
}

impl UtilityScale {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "utility scale needs at least 3 levels, got {}",
                u.len()
            )));
        }
        if u.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig(
                "utility scale must be non-increasing in the outcome level".into(),
            ));
        }
        Ok(Self { u })
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// The 6-level scale used for the clinical-status endpoint:
    /// (100, 80, 65, 25, 10, 0).
    pub fn clinical_six_level() -> Self {
        Self {
            u: vec![100.0, 80.0, 65.0, 25.0, 10.0, 0.0],
        }
    }
}

/// Mean utility `sum_c u[c] * probs[c]`.
pub fn mean_utility(dist: &CategoryDistribution, scale: &UtilityScale) -> Result<f64> {
    if dist.n_categories() != scale.len() {
        return Err(Error::DimensionMismatch {
            expected: dist.n_categories(),
            got: scale.len(),
        });
    }
    Ok(dist
        .probs()
        .iter()
        .zip(scale.values())
        .map(|(p, u)| p * u)
        .sum())
}

/// One simulation scenario: a control distribution, a treatment effect, and
/// the mean-utility difference the effect implies under
/// [`UtilityScale::clinical_six_level`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub control: CategoryDistribution,
    pub effect: EffectSpec,
    pub mean_utility_difference: f64,
}

impl Scenario {
    pub fn new(
        id: impl Into<String>,
        control: CategoryDistribution,
        effect: EffectSpec,
        scale: &UtilityScale,
    ) -> Result<Self> {
        let treatment = apply_odds_ratios(&control, &effect)?;
        let diff = mean_utility(&treatment, scale)? - mean_utility(&control, scale)?;
        Ok(Self {
            id: id.into(),
            control,
            effect,
            mean_utility_difference: diff,
        })
    }

    /// The treatment-arm distribution implied by the control and effect.
    pub fn treatment(&self) -> CategoryDistribution {
        apply_odds_ratios(&self.control, &self.effect).expect("validated at construction")
    }
}

/// The six-level clinical-status control distribution used throughout the
/// built-in scenarios.
pub fn control_p0() -> CategoryDistribution {
    CategoryDistribution::new(vec![0.58, 0.05, 0.17, 0.03, 0.04, 0.13]).unwrap()
}

/// The eight built-in scenarios: the null, four proportional effects with
/// ORs 1.2 through 1.8, and three non-proportional effects with larger shifts
/// on the first two boundaries.
pub fn scenario_catalog() -> Vec<Scenario> {
    let control = control_p0();
    let scale = UtilityScale::clinical_six_level();
    let mut scenarios = Vec::with_capacity(8);
    for (i, or) in [1.0, 1.2, 1.4, 1.6, 1.8].iter().enumerate() {
        scenarios.push(
            Scenario::new(
                format!("{}", i + 1),
                control.clone(),
                EffectSpec::proportional(*or, 6).unwrap(),
                &scale,
            )
            .unwrap(),
        );
    }
    for (i, tail) in [1.1, 1.2, 1.3].iter().enumerate() {
        let ors = vec![1.5, 1.5, *tail, *tail, *tail];
        scenarios.push(
            Scenario::new(
                format!("{}", i + 6),
                control.clone(),
                EffectSpec::new(ors).unwrap(),
                &scale,
            )
            .unwrap(),
        );
    }
    scenarios
}

/// Boundary-wise odds ratios of `result` against `base`; inverse of
/// [`apply_odds_ratios`].
pub fn boundary_odds_ratios(
    base: &CategoryDistribution,
    result: &CategoryDistribution,
) -> Result<Vec<f64>> {
    if base.n_categories() != result.n_categories() {
        return Err(Error::DimensionMismatch {
            expected: base.n_categories(),
            got: result.n_categories(),
        });
    }
    let pb = base.cumulative();
    let pr = result.cumulative();
    Ok(pb[..pb.len() - 1]
        .iter()
        .zip(&pr[..pr.len() - 1])
        .map(|(&b, &r)| (logit(r) - logit(b)).exp())
        .collect())
}
