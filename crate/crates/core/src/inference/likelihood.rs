//! Cumulative-logit log-likelihoods for the PO and NPO models.
//!
//! Category probabilities are differences of logistic CDFs evaluated at the
//! cutpoints. The linear predictor at boundary `b` is
//! `gamma[b] - mu - shift(b)` where the shift is 0 for the control arm, a
//! single `delta` for the PO treatment arm, and `delta[b]` for the NPO
//! treatment arm. Any non-positive category probability makes the whole
//! parameter point inadmissible and the log-likelihood `-inf`.

use crate::math::logistic;

use super::TrialData;

/// Per-boundary shift applied to the treatment arm's linear predictor.
#[derive(Clone, Copy)]
pub(crate) enum Shift<'a> {
    None,
    Scalar(f64),
    PerBoundary(&'a [f64]),
}

impl Shift<'_> {
    #[inline]
    fn at(&self, b: usize) -> f64 {
        match self {
            Shift::None => 0.0,
            Shift::Scalar(d) => *d,
            Shift::PerBoundary(d) => d[b],
        }
    }
}

/// Category probabilities for one arm, or `None` when any probability is
/// non-positive.
#[allow(clippy::needless_range_loop)] // boundary b < k indexes, category k does not
pub(crate) fn category_probs(mu: f64, gamma: &[f64], shift: Shift) -> Option<Vec<f64>> {
    let k = gamma.len();
    let mut probs = Vec::with_capacity(k + 1);
    let mut prev = 0.0;
    for b in 0..=k {
        let cum = if b == k {
            1.0
        } else {
            logistic(gamma[b] - mu - shift.at(b))
        };
        let p = cum - prev;
        if p <= 0.0 {
            return None;
        }
        probs.push(p);
        prev = cum;
    }
    Some(probs)
}

fn arm_log_lik(counts: &[u64], mu: f64, gamma: &[f64], shift: Shift) -> f64 {
    let k = gamma.len();
    let mut ll = 0.0;
    let mut prev = 0.0;
    for c in 0..=k {
        let cum = if c == k {
            1.0
        } else {
            logistic(gamma[c] - mu - shift.at(c))
        };
        let p = cum - prev;
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if counts[c] > 0 {
            ll += counts[c] as f64 * p.ln();
        }
        prev = cum;
    }
    ll
}

/// PO log-likelihood: one log-odds shift `delta` at every boundary.
pub fn log_likelihood_po(data: &TrialData, mu: f64, gamma: &[f64], delta: f64) -> f64 {
    arm_log_lik(data.control.counts(), mu, gamma, Shift::None)
        + arm_log_lik(data.treatment.counts(), mu, gamma, Shift::Scalar(delta))
}

/// NPO log-likelihood: a separate shift per boundary. With varying shifts the
/// treatment cumulative curve can cross itself, which surfaces as a
/// non-positive probability and a `-inf` return.
pub fn log_likelihood_npo(data: &TrialData, mu: f64, gamma: &[f64], delta: &[f64]) -> f64 {
    debug_assert_eq!(delta.len(), gamma.len());
    arm_log_lik(data.control.counts(), mu, gamma, Shift::None)
        + arm_log_lik(
            data.treatment.counts(),
            mu,
            gamma,
            Shift::PerBoundary(delta),
        )
}
