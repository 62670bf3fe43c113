//! Fast frequentist stand-ins for the Bayesian decision criteria.
//!
//! PO: Newton maximization of the PO log-likelihood with the location fixed
//! at zero (the cumulative-logit model has no separate intercept), returning
//! `Phi(-delta_hat / se)` with the standard error taken from the observed
//! information. NPO: plug-in per-arm proportions with a multinomial bootstrap
//! of the mean-utility comparison.
//!
//! Categories that are empty in both arms are merged into their right
//! neighbor (the last into its left neighbor) for the fit only.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{invert_matrix, logistic, logit, normal_cdf, solve_linear};
use crate::ordinal::UtilityScale;

use super::{ArmData, Model, TrialData};

const BOOTSTRAP_RESAMPLES: usize = 1000;
const NEWTON_MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;

/// Frequentist analog of `pi` / `pi_U`. The utility scale is required for the
/// NPO model and ignored for PO. The NPO path consumes randomness for its
/// bootstrap; the PO path is deterministic.
pub fn frequentist_prob_effective<R: Rng + ?Sized>(
    data: &TrialData,
    model: Model,
    scale: Option<&UtilityScale>,
    rng: &mut R,
) -> Result<f64> {
    let c = data.n_categories() as u64;
    if data.control.total() < c || data.treatment.total() < c {
        return Err(Error::InvalidConfig(format!(
            "each arm needs at least C = {c} observations"
        )));
    }
    match model {
        Model::Po => {
            let fit = fit_po_mle(data)?;
            Ok(normal_cdf(-fit.delta_hat / fit.se_delta))
        }
        Model::Npo => {
            let scale = scale.ok_or_else(|| {
                Error::InvalidConfig("NPO frequentist criterion needs a utility scale".into())
            })?;
            bootstrap_utility_comparison(data, scale, rng)
        }
    }
}

pub(crate) struct PoMleFit {
    pub delta_hat: f64,
    pub se_delta: f64,
    pub log_lik: f64,
    /// Number of categories after merging.
    pub n_merged: usize,
}

/// Merge categories with zero pooled count; returns merged (control,
/// treatment) count vectors.
fn merged_counts(data: &TrialData) -> (Vec<u64>, Vec<u64>) {
    let mut ctr: Vec<u64> = Vec::new();
    let mut trt: Vec<u64> = Vec::new();
    for (a, b) in data.control.counts().iter().zip(data.treatment.counts()) {
        if a + b == 0 && !ctr.is_empty() {
            continue; // fold into the previous category (no mass to move)
        }
        ctr.push(*a);
        trt.push(*b);
    }
    // A leading empty block folds forward into the first occupied category;
    // trailing handled above. Re-scan for a leading zero pair.
    while ctr.len() > 1 && ctr[0] + trt[0] == 0 {
        ctr.remove(0);
        trt.remove(0);
    }
    (ctr, trt)
}

pub(crate) fn fit_po_mle(data: &TrialData) -> Result<PoMleFit> {
    let (ctr, trt) = merged_counts(data);
    let c = ctr.len();
    if c < 2 {
        return Err(Error::FitFailure {
            reason: "all observations fall in a single category".into(),
        });
    }
    let k = c - 1;
    let n_par = k + 1;

    // Initial cutpoints from pooled empirical logits, delta from zero.
    let total = (ctr.iter().sum::<u64>() + trt.iter().sum::<u64>()) as f64;
    let mut theta = Vec::with_capacity(n_par);
    let mut acc = 0.0;
    for b in 0..k {
        acc += (ctr[b] + trt[b]) as f64;
        theta.push(logit((acc / total).clamp(0.01, 0.99)));
    }
    for b in 1..k {
        if theta[b] <= theta[b - 1] {
            theta[b] = theta[b - 1] + 1e-3;
        }
    }
    theta.push(0.0); // delta

    let ll_at = |th: &[f64]| po_log_lik(&ctr, &trt, &th[..k], th[k]);
    let mut ll = ll_at(&theta);
    if ll == f64::NEG_INFINITY {
        return Err(Error::FitFailure {
            reason: "initial point inadmissible".into(),
        });
    }

    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let grad = po_gradient(&ctr, &trt, &theta[..k], theta[k]);
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < GRAD_TOL * (1.0 + ll.abs()) {
            converged = true;
            break;
        }
        let hess = hessian_fd(&ctr, &trt, &theta, k);
        // Solve H s = g; Newton step is theta - s.
        let mut h = hess.clone();
        let mut s = grad.clone();
        if solve_linear(&mut h, &mut s, n_par).is_none() {
            return Err(Error::FitFailure {
                reason: "singular Hessian (separation or empty boundary)".into(),
            });
        }
        let mut t = 1.0;
        let mut advanced = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta.iter().zip(&s).map(|(p, d)| p - t * d).collect();
            let cand_ll = ll_at(&cand);
            if cand_ll > ll {
                theta = cand;
                ll = cand_ll;
                advanced = true;
                break;
            }
            t *= 0.5;
        }
        if !advanced {
            // No uphill progress along the Newton direction; accept as
            // converged only if the gradient is already small.
            converged = gnorm < 1e-4 * (1.0 + ll.abs());
            break;
        }
    }
    if !converged {
        let grad = po_gradient(&ctr, &trt, &theta[..k], theta[k]);
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm >= 1e-4 * (1.0 + ll.abs()) {
            return Err(Error::FitFailure {
                reason: format!("Newton did not converge (|grad| = {gnorm:.3e})"),
            });
        }
    }

    let hess = hessian_fd(&ctr, &trt, &theta, k);
    let info: Vec<f64> = hess.iter().map(|h| -h).collect();
    let cov = invert_matrix(&info, n_par).ok_or_else(|| Error::FitFailure {
        reason: "observed information is singular".into(),
    })?;
    let var_delta = cov[k * n_par + k];
    if var_delta <= 0.0 || !var_delta.is_finite() {
        return Err(Error::FitFailure {
            reason: format!("non-positive variance for the effect ({var_delta})"),
        });
    }
    Ok(PoMleFit {
        delta_hat: theta[k],
        se_delta: var_delta.sqrt(),
        log_lik: ll,
        n_merged: c,
    })
}

fn po_log_lik(ctr: &[u64], trt: &[u64], gamma: &[f64], delta: f64) -> f64 {
    let k = gamma.len();
    let mut ll = 0.0;
    for (counts, shift) in [(ctr, 0.0), (trt, delta)] {
        let mut prev = 0.0;
        for c in 0..=k {
            let cum = if c == k {
                1.0
            } else {
                logistic(gamma[c] - shift)
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
    }
    ll
}

/// Analytic gradient of `po_log_lik` in `(gamma, delta)`.
fn po_gradient(ctr: &[u64], trt: &[u64], gamma: &[f64], delta: f64) -> Vec<f64> {
    let k = gamma.len();
    let mut grad = vec![0.0; k + 1];
    for (counts, shift, is_trt) in [(ctr, 0.0, false), (trt, delta, true)] {
        let cum: Vec<f64> = (0..k).map(|b| logistic(gamma[b] - shift)).collect();
        let dens: Vec<f64> = cum.iter().map(|f| f * (1.0 - f)).collect();
        let prob = |c: usize| -> f64 {
            let hi = if c == k { 1.0 } else { cum[c] };
            let lo = if c == 0 { 0.0 } else { cum[c - 1] };
            hi - lo
        };
        for b in 0..k {
            let p_below = prob(b);
            let p_above = prob(b + 1);
            let g = counts[b] as f64 * dens[b] / p_below - counts[b + 1] as f64 * dens[b] / p_above;
            grad[b] += g;
            if is_trt {
                grad[k] -= g;
            }
        }
    }
    grad
}

/// Hessian by central finite differences of the analytic gradient.
fn hessian_fd(ctr: &[u64], trt: &[u64], theta: &[f64], k: usize) -> Vec<f64> {
    let n = theta.len();
    let mut hess = vec![0.0; n * n];
    let mut work = theta.to_vec();
    for j in 0..n {
        let h = 1e-5 * (1.0 + theta[j].abs());
        work[j] = theta[j] + h;
        let gp = po_gradient(ctr, trt, &work[..k], work[k]);
        work[j] = theta[j] - h;
        let gm = po_gradient(ctr, trt, &work[..k], work[k]);
        work[j] = theta[j];
        for i in 0..n {
            hess[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    // Symmetrize against finite-difference noise.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (hess[i * n + j] + hess[j * n + i]);
            hess[i * n + j] = avg;
            hess[j * n + i] = avg;
        }
    }
    hess
}

fn bootstrap_utility_comparison<R: Rng + ?Sized>(
    data: &TrialData,
    scale: &UtilityScale,
    rng: &mut R,
) -> Result<f64> {
    let c = data.n_categories();
    if scale.len() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            got: scale.len(),
        });
    }
    let u = scale.values();
    let n_ctr = data.control.total();
    let n_trt = data.treatment.total();
    let props = |arm: &ArmData| -> Vec<f64> {
        let t = arm.total() as f64;
        arm.counts().iter().map(|&x| x as f64 / t).collect()
    };
    let p_ctr = props(&data.control);
    let p_trt = props(&data.treatment);

    let mut hits = 0usize;
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let u_ctr = resampled_mean_utility(&p_ctr, n_ctr, u, rng);
        let u_trt = resampled_mean_utility(&p_trt, n_trt, u, rng);
        if u_trt > u_ctr {
            hits += 1;
        }
    }
    Ok(hits as f64 / BOOTSTRAP_RESAMPLES as f64)
}

fn resampled_mean_utility<R: Rng + ?Sized>(probs: &[f64], n: u64, u: &[f64], rng: &mut R) -> f64 {
    use rand_distr::{Binomial, Distribution};
    let mut remaining = n;
    let mut mass_left = 1.0;
    let mut total_u = 0.0;
    for (c, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let draw = if c + 1 == probs.len() {
            remaining
        } else {
            let cond = (p / mass_left).clamp(0.0, 1.0);
            if cond >= 1.0 {
                remaining
            } else if cond <= 0.0 {
                0
            } else {
                Binomial::new(remaining, cond).unwrap().sample(rng)
            }
        };
        total_u += draw as f64 * u[c];
        remaining -= draw;
        mass_left -= p;
    }
    total_u / n as f64
}

/// Frequentist model choice for the switch design: prefer NPO when its BIC
/// beats the PO model's. The NPO maximum likelihood is the saturated per-arm
/// fit, so it has a closed form.
pub fn frequentist_selects_npo(data: &TrialData) -> Result<bool> {
    let po = fit_po_mle(data)?;
    let (ctr, trt) = merged_counts(data);
    let mut ll_npo = 0.0;
    for counts in [&ctr, &trt] {
        let n = counts.iter().sum::<u64>() as f64;
        for &x in counts.iter() {
            if x > 0 {
                ll_npo += x as f64 * ((x as f64 / n).ln());
            }
        }
    }
    let k = po.n_merged - 1;
    let n_total = (data.control.total() + data.treatment.total()) as f64;
    let bic_po = -2.0 * po.log_lik + (k as f64 + 1.0) * n_total.ln();
    let bic_npo = -2.0 * ll_npo + (2.0 * k as f64) * n_total.ln();
    Ok(bic_npo < bic_po)
}
