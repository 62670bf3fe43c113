//! Two-stage group-sequential trial simulation and operating-characteristic
//! aggregation for the PO, NPO, and PO/NPO switch designs.
//!
//! Every trial runs on its own random stream derived from the master seed and
//! the trial index, so aggregate results are bit-identical regardless of how
//! trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    fit, frequentist_prob_effective, frequentist_selects_npo, prob_effective_npo,
    prob_effective_po, ArmData, McmcConfig, Model, PriorSpec, TrialData,
};
use crate::math::mix_seed;
use crate::ordinal::{apply_odds_ratios, CategoryDistribution, EffectSpec, Scenario, UtilityScale};
use crate::rjmcmc::{select_model, RjConfig};

const SEED_TAG_TRIAL: u64 = 0x7472_6961; // "tria"
const MAX_TRIAL_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Design {
    Po,
    Npo,
    Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Bayesian,
    Frequentist,
}

/// Per-group stage-1/stage-2 sample sizes the switch design would use under
/// each candidate model. Stage 1 enrolls the larger of the two stage-1 sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchSizes {
    pub po_stage1: u64,
    pub po_stage2: u64,
    pub npo_stage1: u64,
    pub npo_stage2: u64,
}

impl SwitchSizes {
    pub fn stage1(&self) -> u64 {
        self.po_stage1.max(self.npo_stage1)
    }
}

/// Per-group-per-stage enrollment plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageSizes {
    /// The same size at both stages (PO and NPO designs).
    Fixed { per_stage: u64 },
    /// Model-dependent sizes (switch design).
    Switch(SwitchSizes),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignConfig {
    pub design: Design,
    pub n_categories: usize,
    pub stage_sizes: StageSizes,
    /// Futility cutoff: stop at the interim when the criterion falls below.
    pub c_f: f64,
    /// Superiority cutoff applied to the final criterion.
    pub c_s: f64,
    pub priors: PriorSpec,
    pub mcmc: McmcConfig,
    pub utility: UtilityScale,
    pub method: Method,
    pub rj: RjConfig,
    pub seed: u64,
}

impl DesignConfig {
    /// A ready-to-run configuration with the crate defaults for priors,
    /// sampler, utility scale, and model-selection settings.
    pub fn new(design: Design, n_categories: usize, per_stage: u64, c_f: f64, c_s: f64) -> Self {
        let stage_sizes = match design {
            Design::Switch => StageSizes::Switch(SwitchSizes {
                po_stage1: per_stage,
                po_stage2: per_stage,
                npo_stage1: per_stage,
                npo_stage2: per_stage,
            }),
            _ => StageSizes::Fixed { per_stage },
        };
        let utility = if n_categories == 6 {
            UtilityScale::clinical_six_level()
        } else {
            // Linear 100..0 ramp as a placeholder scale for other C.
            UtilityScale::new(
                (0..n_categories)
                    .map(|i| 100.0 * (n_categories - 1 - i) as f64 / (n_categories - 1) as f64)
                    .collect(),
            )
            .expect("linear ramp is non-increasing")
        };
        Self {
            design,
            n_categories,
            stage_sizes,
            c_f,
            c_s,
            priors: PriorSpec::defaults(n_categories),
            mcmc: McmcConfig::default(),
            utility,
            method: Method::Bayesian,
            rj: RjConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_categories < 3 {
            return Err(Error::InvalidConfig(
                "need at least 3 outcome levels".into(),
            ));
        }
        if self.c_f.is_nan() || self.c_s.is_nan() || self.c_f >= self.c_s {
            return Err(Error::InvalidConfig(format!(
                "futility cutoff {} must be below superiority cutoff {}",
                self.c_f, self.c_s
            )));
        }
        match (&self.design, &self.stage_sizes) {
            (Design::Switch, StageSizes::Switch(s)) => {
                if s.po_stage1 == 0 || s.npo_stage1 == 0 || s.po_stage2 == 0 || s.npo_stage2 == 0 {
                    return Err(Error::InvalidConfig("stage sizes must be positive".into()));
                }
            }
            (Design::Switch, _) => {
                return Err(Error::InvalidConfig(
                    "switch design needs model-dependent stage sizes".into(),
                ))
            }
            (_, StageSizes::Fixed { per_stage }) => {
                if *per_stage == 0 {
                    return Err(Error::InvalidConfig("stage size must be positive".into()));
                }
            }
            (_, StageSizes::Switch(_)) => {
                return Err(Error::InvalidConfig(
                    "fixed designs take a single per-stage size".into(),
                ))
            }
        }
        if self.utility.len() != self.n_categories {
            return Err(Error::DimensionMismatch {
                expected: self.n_categories,
                got: self.utility.len(),
            });
        }
        self.priors.validate(self.n_categories)?;
        self.mcmc.validate()?;
        self.rj.validate()
    }

    fn analysis_model(&self) -> Model {
        match self.design {
            Design::Po => Model::Po,
            Design::Npo => Model::Npo,
            Design::Switch => unreachable!("switch chooses per trial"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    StoppedFutile,
    Superior,
    NotEffective,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub decision: Decision,
    pub n_enrolled_per_arm: u64,
    pub interim_stat: f64,
    pub final_stat: Option<f64>,
    /// Model selected at the interim (switch design only).
    pub chosen_model: Option<Model>,
}

/// A trial evaluated through both stages regardless of the futility rule, so
/// that any cutoff pair can be applied afterwards. Used by calibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialTrace {
    pub interim_stat: f64,
    pub final_stat: f64,
    pub chosen_model: Option<Model>,
    pub n_stage1_per_arm: u64,
    pub n_stage2_per_arm: u64,
}

impl TrialTrace {
    /// Decision under a given cutoff pair.
    pub fn decide(&self, c_f: f64, c_s: f64) -> Decision {
        if self.interim_stat < c_f {
            Decision::StoppedFutile
        } else if self.final_stat > c_s {
            Decision::Superior
        } else {
            Decision::NotEffective
        }
    }

    pub fn rejects(&self, c_f: f64, c_s: f64) -> bool {
        self.decide(c_f, c_s) == Decision::Superior
    }
}

/// Criterion statistic for one analysis: `pi` under PO, `pi_U` under NPO,
/// via the configured inference method.
fn criterion_stat(
    cfg: &DesignConfig,
    data: &TrialData,
    model: Model,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    match cfg.method {
        Method::Bayesian => {
            let draws = fit(data, model, &cfg.priors, &cfg.mcmc, rng)?;
            match model {
                Model::Po => prob_effective_po(&draws),
                Model::Npo => prob_effective_npo(&draws, &cfg.utility),
            }
        }
        Method::Frequentist => frequentist_prob_effective(data, model, Some(&cfg.utility), rng),
    }
}

fn sample_stage(
    control: &CategoryDistribution,
    treatment: &CategoryDistribution,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TrialData> {
    let ctr = ArmData::new(control.sample_counts(n, rng))?;
    let trt = ArmData::new(treatment.sample_counts(n, rng))?;
    TrialData::new(ctr, trt)
}

struct StageOne {
    data: TrialData,
    stat: f64,
    chosen: Option<Model>,
    n1: u64,
    n2_planned: u64,
    final_model: Model,
}

fn run_stage_one(
    cfg: &DesignConfig,
    control: &CategoryDistribution,
    treatment: &CategoryDistribution,
    rng: &mut ChaCha8Rng,
) -> Result<StageOne> {
    match (&cfg.design, &cfg.stage_sizes) {
        (Design::Switch, StageSizes::Switch(sizes)) => {
            let n1 = sizes.stage1();
            let data = sample_stage(control, treatment, n1, rng)?;
            let (chosen, stat) = match cfg.method {
                Method::Bayesian => {
                    let po = fit(&data, Model::Po, &cfg.priors, &cfg.mcmc, rng)?;
                    let npo = fit(&data, Model::Npo, &cfg.priors, &cfg.mcmc, rng)?;
                    let choice = select_model(&po, &npo, &data, &cfg.priors, &cfg.rj, rng)?;
                    let stat = match choice.selected {
                        Model::Po => prob_effective_po(&po)?,
                        Model::Npo => prob_effective_npo(&npo, &cfg.utility)?,
                    };
                    (choice.selected, stat)
                }
                Method::Frequentist => {
                    let chosen = if frequentist_selects_npo(&data)? {
                        Model::Npo
                    } else {
                        Model::Po
                    };
                    let stat = frequentist_prob_effective(&data, chosen, Some(&cfg.utility), rng)?;
                    (chosen, stat)
                }
            };
            let n2 = match chosen {
                Model::Po => sizes.po_stage2,
                Model::Npo => sizes.npo_stage2,
            };
            Ok(StageOne {
                data,
                stat,
                chosen: Some(chosen),
                n1,
                n2_planned: n2,
                final_model: chosen,
            })
        }
        (_, StageSizes::Fixed { per_stage }) => {
            let model = cfg.analysis_model();
            let data = sample_stage(control, treatment, *per_stage, rng)?;
            let stat = criterion_stat(cfg, &data, model, rng)?;
            Ok(StageOne {
                data,
                stat,
                chosen: None,
                n1: *per_stage,
                n2_planned: *per_stage,
                final_model: model,
            })
        }
        _ => Err(Error::InvalidConfig(
            "design and stage sizes are inconsistent".into(),
        )),
    }
}

fn run_stage_two(
    cfg: &DesignConfig,
    stage_one: &StageOne,
    control: &CategoryDistribution,
    treatment: &CategoryDistribution,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let stage2 = sample_stage(control, treatment, stage_one.n2_planned, rng)?;
    let pooled = stage_one.data.pooled_with(&stage2)?;
    criterion_stat(cfg, &pooled, stage_one.final_model, rng)
}

/// Simulate one two-stage trial under the configured design.
///
/// Stage 1 enrolls the planned per-arm size and computes the interim
/// criterion; below `c_f` the trial stops for futility. Otherwise stage 2
/// enrolls, the criterion is recomputed on the pooled data, and the trial
/// concludes superior iff it exceeds `c_s`.
pub fn simulate_trial(
    cfg: &DesignConfig,
    truth_control: &CategoryDistribution,
    truth_effect: &EffectSpec,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    let treatment = apply_odds_ratios(truth_control, truth_effect)?;
    let s1 = run_stage_one(cfg, truth_control, &treatment, rng)?;
    if s1.stat < cfg.c_f {
        return Ok(TrialOutcome {
            decision: Decision::StoppedFutile,
            n_enrolled_per_arm: s1.n1,
            interim_stat: s1.stat,
            final_stat: None,
            chosen_model: s1.chosen,
        });
    }
    let final_stat = run_stage_two(cfg, &s1, truth_control, &treatment, rng)?;
    let decision = if final_stat > cfg.c_s {
        Decision::Superior
    } else {
        Decision::NotEffective
    };
    Ok(TrialOutcome {
        decision,
        n_enrolled_per_arm: s1.n1 + s1.n2_planned,
        interim_stat: s1.stat,
        final_stat: Some(final_stat),
        chosen_model: s1.chosen,
    })
}

/// Simulate one trial through both stages unconditionally, recording both
/// criterion values so cutoffs can be applied after the fact.
pub fn simulate_trial_trace(
    cfg: &DesignConfig,
    truth_control: &CategoryDistribution,
    truth_effect: &EffectSpec,
    rng: &mut ChaCha8Rng,
) -> Result<TrialTrace> {
    let treatment = apply_odds_ratios(truth_control, truth_effect)?;
    let s1 = run_stage_one(cfg, truth_control, &treatment, rng)?;
    let final_stat = run_stage_two(cfg, &s1, truth_control, &treatment, rng)?;
    Ok(TrialTrace {
        interim_stat: s1.stat,
        final_stat,
        chosen_model: s1.chosen,
        n_stage1_per_arm: s1.n1,
        n_stage2_per_arm: s1.n2_planned,
    })
}

/// Aggregated behavior of the design over simulated trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatingCharacteristics {
    /// Percent of trials stopped early for futility.
    pub pet: f64,
    /// Percent of trials declaring superiority (type I error under the null,
    /// power otherwise).
    pub prn: f64,
    pub avg_n_per_arm: f64,
    /// Per-trial total across both arms.
    pub avg_n_total: f64,
    pub n_trials: usize,
    /// Trials that produced a valid outcome within the rerun cap.
    pub n_valid: usize,
    /// Reruns consumed by sampler or optimizer failures.
    pub reruns: usize,
    pub outcomes: Vec<TrialOutcome>,
}

fn rerun_worthy(err: &Error) -> bool {
    matches!(
        err,
        Error::ChainDegenerate { .. } | Error::FitFailure { .. }
    )
}

fn run_one_trial<T>(
    cfg: &DesignConfig,
    control: &CategoryDistribution,
    effect: &EffectSpec,
    trial_index: usize,
    runner: impl Fn(&DesignConfig, &CategoryDistribution, &EffectSpec, &mut ChaCha8Rng) -> Result<T>,
) -> (std::result::Result<T, Error>, usize) {
    let mut reruns = 0;
    for attempt in 0..MAX_TRIAL_ATTEMPTS {
        let seed = mix_seed(&[cfg.seed, SEED_TAG_TRIAL, trial_index as u64, attempt as u64]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match runner(cfg, control, effect, &mut rng) {
            Ok(v) => return (Ok(v), reruns),
            Err(e) if rerun_worthy(&e) && attempt + 1 < MAX_TRIAL_ATTEMPTS => {
                reruns += 1;
            }
            Err(e) => {
                let boxed = Error::TrialInvalid {
                    attempts: attempt + 1,
                    source: Box::new(e),
                };
                return (Err(boxed), reruns);
            }
        }
    }
    unreachable!("loop always returns")
}

/// Run `n_trials` independent trials of `scenario` and aggregate PET, PRN,
/// and average sample size. Trials run in parallel on per-trial derived
/// streams; results do not depend on the schedule.
pub fn operating_characteristics(
    cfg: &DesignConfig,
    scenario: &Scenario,
    n_trials: usize,
) -> Result<OperatingCharacteristics> {
    cfg.validate()?;
    if n_trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    // Surface truth-level problems once, before the parallel loop.
    apply_odds_ratios(&scenario.control, &scenario.effect)?;

    let results: Vec<(std::result::Result<TrialOutcome, Error>, usize)> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_one_trial(cfg, &scenario.control, &scenario.effect, i, simulate_trial))
        .collect();

    let mut outcomes = Vec::with_capacity(n_trials);
    let mut reruns = 0;
    let mut last_err = None;
    for (res, r) in results {
        reruns += r;
        match res {
            Ok(o) => outcomes.push(o),
            Err(e) => last_err = Some(e),
        }
    }
    let n_valid = outcomes.len();
    if n_valid == 0 {
        return Err(last_err.expect("at least one trial ran"));
    }
    let futile = outcomes
        .iter()
        .filter(|o| o.decision == Decision::StoppedFutile)
        .count();
    let superior = outcomes
        .iter()
        .filter(|o| o.decision == Decision::Superior)
        .count();
    let total_n: u64 = outcomes.iter().map(|o| o.n_enrolled_per_arm).sum();
    let avg_n_per_arm = total_n as f64 / n_valid as f64;
    Ok(OperatingCharacteristics {
        pet: 100.0 * futile as f64 / n_valid as f64,
        prn: 100.0 * superior as f64 / n_valid as f64,
        avg_n_per_arm,
        avg_n_total: 2.0 * avg_n_per_arm,
        n_trials,
        n_valid,
        reruns,
        outcomes,
    })
}

/// Trace every trial through both stages (for calibration over cutoff grids).
/// `seed_salt` separates batches drawn for different purposes from the same
/// master seed.
pub fn simulate_traces(
    cfg: &DesignConfig,
    control: &CategoryDistribution,
    effect: &EffectSpec,
    n_trials: usize,
    seed_salt: u64,
) -> Result<Vec<TrialTrace>> {
    cfg.validate()?;
    apply_odds_ratios(control, effect)?;
    let salted = DesignConfig {
        seed: mix_seed(&[cfg.seed, seed_salt]),
        ..cfg.clone()
    };
    let results: Vec<(std::result::Result<TrialTrace, Error>, usize)> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_one_trial(&salted, control, effect, i, simulate_trial_trace))
        .collect();
    let mut traces = Vec::with_capacity(n_trials);
    for (res, _) in results {
        traces.push(res?);
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::scenario_catalog;

    fn fast_cfg(design: Design, per_stage: u64) -> DesignConfig {
        let mut cfg = DesignConfig::new(design, 6, per_stage, 0.2, 0.95);
        cfg.method = Method::Frequentist;
        cfg.seed = 42;
        cfg
    }

    #[test]
    fn degenerate_futility_cutoff_stops_everything() {
        let mut cfg = fast_cfg(Design::Po, 40);
        cfg.c_f = 1.0;
        cfg.c_s = 1.5; // unreachable, satisfies c_f < c_s
        let null = &scenario_catalog()[0];
        let oc = operating_characteristics(&cfg, null, 50).unwrap();
        assert_eq!(oc.pet, 100.0);
        assert_eq!(oc.prn, 0.0);
        assert_eq!(oc.avg_n_per_arm, 40.0);
    }

    #[test]
    fn unreachable_superiority_cutoff_never_rejects() {
        let mut cfg = fast_cfg(Design::Po, 40);
        cfg.c_f = 0.0;
        cfg.c_s = 1.5;
        let s5 = &scenario_catalog()[4];
        let oc = operating_characteristics(&cfg, s5, 50).unwrap();
        assert_eq!(oc.prn, 0.0);
        assert_eq!(oc.pet, 0.0);
        assert_eq!(oc.avg_n_per_arm, 80.0);
    }

    #[test]
    fn single_trial_aggregation_base_case() {
        let cfg = fast_cfg(Design::Po, 50);
        let s5 = &scenario_catalog()[4];
        let oc = operating_characteristics(&cfg, s5, 1).unwrap();
        assert_eq!(oc.n_valid, 1);
        let o = &oc.outcomes[0];
        match o.decision {
            Decision::StoppedFutile => {
                assert_eq!(oc.pet, 100.0);
                assert_eq!(o.n_enrolled_per_arm, 50);
            }
            _ => {
                assert_eq!(oc.pet, 0.0);
                assert_eq!(o.n_enrolled_per_arm, 100);
            }
        }
    }

    #[test]
    fn average_sample_size_identity_for_fixed_designs() {
        let cfg = fast_cfg(Design::Po, 30);
        let s2 = &scenario_catalog()[1];
        let oc = operating_characteristics(&cfg, s2, 200).unwrap();
        let expected = 30.0 * (2.0 - oc.pet / 100.0);
        assert!(
            (oc.avg_n_per_arm - expected).abs() < 1e-9,
            "{} vs {expected}",
            oc.avg_n_per_arm
        );
        assert!((oc.avg_n_total - 2.0 * oc.avg_n_per_arm).abs() < 1e-12);
    }

    #[test]
    fn identical_seeds_reproduce_identically() {
        let cfg = fast_cfg(Design::Po, 40);
        let s3 = &scenario_catalog()[2];
        let a = operating_characteristics(&cfg, s3, 60).unwrap();
        let b = operating_characteristics(&cfg, s3, 60).unwrap();
        assert_eq!(a.pet, b.pet);
        assert_eq!(a.prn, b.prn);
        assert_eq!(a.avg_n_per_arm, b.avg_n_per_arm);
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.interim_stat, y.interim_stat);
            assert_eq!(x.final_stat, y.final_stat);
        }
    }

    #[test]
    fn outcomes_are_consistent_with_cutoffs() {
        let cfg = fast_cfg(Design::Po, 40);
        let s3 = &scenario_catalog()[2];
        let oc = operating_characteristics(&cfg, s3, 100).unwrap();
        for o in &oc.outcomes {
            match o.decision {
                Decision::StoppedFutile => {
                    assert!(o.interim_stat < cfg.c_f);
                    assert!(o.final_stat.is_none());
                    assert_eq!(o.n_enrolled_per_arm, 40);
                }
                Decision::Superior => {
                    assert!(o.interim_stat >= cfg.c_f);
                    assert!(o.final_stat.unwrap() > cfg.c_s);
                    assert_eq!(o.n_enrolled_per_arm, 80);
                }
                Decision::NotEffective => {
                    assert!(o.interim_stat >= cfg.c_f);
                    assert!(o.final_stat.unwrap() <= cfg.c_s);
                    assert_eq!(o.n_enrolled_per_arm, 80);
                }
            }
        }
    }

    #[test]
    fn switch_design_records_chosen_model_and_sizes() {
        let mut cfg = DesignConfig::new(Design::Switch, 6, 0, 0.1, 0.95);
        cfg.stage_sizes = StageSizes::Switch(SwitchSizes {
            po_stage1: 40,
            po_stage2: 40,
            npo_stage1: 60,
            npo_stage2: 60,
        });
        cfg.method = Method::Frequentist;
        cfg.seed = 7;
        let s8 = &scenario_catalog()[7];
        let oc = operating_characteristics(&cfg, s8, 40).unwrap();
        for o in &oc.outcomes {
            let chosen = o.chosen_model.expect("switch records the chosen model");
            match o.decision {
                Decision::StoppedFutile => assert_eq!(o.n_enrolled_per_arm, 60),
                _ => {
                    let n2 = match chosen {
                        Model::Po => 40,
                        Model::Npo => 60,
                    };
                    assert_eq!(o.n_enrolled_per_arm, 60 + n2);
                }
            }
        }
    }

    #[test]
    fn trace_decisions_match_direct_simulation_logic() {
        let cfg = fast_cfg(Design::Po, 30);
        let null = &scenario_catalog()[0];
        let traces = simulate_traces(&cfg, &null.control, &null.effect, 50, 0).unwrap();
        for t in &traces {
            let d = t.decide(0.2, 0.95);
            match d {
                Decision::StoppedFutile => assert!(t.interim_stat < 0.2),
                Decision::Superior => {
                    assert!(t.interim_stat >= 0.2 && t.final_stat > 0.95)
                }
                Decision::NotEffective => {
                    assert!(t.interim_stat >= 0.2 && t.final_stat <= 0.95)
                }
            }
            assert!(!t.rejects(0.0, 1.5));
        }
    }

    #[test]
    fn config_validation_catches_inconsistencies() {
        let mut cfg = fast_cfg(Design::Po, 40);
        cfg.c_f = 0.9;
        cfg.c_s = 0.5;
        assert!(cfg.validate().is_err());

        let mut cfg = fast_cfg(Design::Switch, 40);
        // Design::Switch with Fixed sizes is rejected.
        cfg.stage_sizes = StageSizes::Fixed { per_stage: 40 };
        assert!(cfg.validate().is_err());
    }
}
