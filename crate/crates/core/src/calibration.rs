//! Simulation-based calibration of the futility/superiority cutoffs to a
//! target type I error, and sample-size search to a target power.
//!
//! The grid search reuses one batch of null trials for every cutoff pair
//! (common random numbers): each trial is traced through both stages, and any
//! `(c_f, c_s)` pair is just a post-hoc decision rule on the recorded
//! statistics. The search therefore costs one simulation batch, not one per
//! grid point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::{CategoryDistribution, EffectSpec};
use crate::trial::{simulate_traces, Design, DesignConfig, Method, StageSizes, SwitchSizes};

const SALT_CALIBRATION: u64 = 0x6361_6c69; // "cali"
const SALT_POWER: u64 = 0x706f_7765; // "powe"
const SALT_CONFIRM: u64 = 0x636f_6e66; // "conf"

/// Candidate cutoffs. Defaults: `c_f` from 0.05 to 0.30 in steps of 0.05,
/// `c_s` from 0.80 to 0.99 in steps of 0.01.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffGrid {
    pub c_f: Vec<f64>,
    pub c_s: Vec<f64>,
}

impl Default for CutoffGrid {
    fn default() -> Self {
        Self {
            c_f: (1..=6).map(|i| i as f64 / 20.0).collect(),
            c_s: (80..=99).map(|i| i as f64 / 100.0).collect(),
        }
    }
}

impl CutoffGrid {
    /// A grid with the futility cutoff pinned to one value.
    pub fn with_fixed_cf(c_f: f64) -> Self {
        Self {
            c_f: vec![c_f],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_f.is_empty() || self.c_s.is_empty() {
            return Err(Error::InvalidConfig("empty cutoff grid".into()));
        }
        for &v in self.c_f.iter().chain(&self.c_s) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "grid cutoff {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub c_f: f64,
    pub c_s: f64,
    /// Null rejection rate at the chosen pair (from the grid batch).
    pub achieved_type1: f64,
    /// Every `(c_f, c_s, type1)` evaluated.
    pub grid: Vec<(f64, f64, f64)>,
    /// Null rejection rate from an independent confirmation batch run with
    /// the design's own method, when requested.
    pub confirmation_type1: Option<f64>,
}

/// Options for [`calibrate_thresholds`].
#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub alpha: f64,
    pub grid: CutoffGrid,
    pub n_trials: usize,
    /// Run an independent batch at the chosen pair with `Method::Bayesian`
    /// (the design method used in the field) and report its type I error.
    pub bayes_confirm_trials: Option<usize>,
}

impl CalibrateOptions {
    pub fn new(alpha: f64, n_trials: usize) -> Self {
        Self {
            alpha,
            grid: CutoffGrid::default(),
            n_trials,
            bayes_confirm_trials: None,
        }
    }
}

fn null_effect(n_categories: usize) -> EffectSpec {
    EffectSpec::proportional(1.0, n_categories).unwrap()
}

/// Choose `(c_f, c_s)` by simulating the null and keeping the pair with the
/// highest null rejection rate not exceeding `alpha`; ties prefer the larger
/// `c_f` (more early stopping under the null), then the smaller `c_s`.
pub fn calibrate_thresholds(
    cfg: &DesignConfig,
    control: &CategoryDistribution,
    opts: &CalibrateOptions,
) -> Result<CalibrationResult> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha {} outside (0, 1)",
            opts.alpha
        )));
    }
    opts.grid.validate()?;
    if opts.n_trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    let null = null_effect(cfg.n_categories);
    let traces = simulate_traces(cfg, control, &null, opts.n_trials, SALT_CALIBRATION)?;

    let mut grid_rows = Vec::with_capacity(opts.grid.c_f.len() * opts.grid.c_s.len());
    let mut best: Option<(f64, f64, f64)> = None;
    for &cf in &opts.grid.c_f {
        for &cs in &opts.grid.c_s {
            if cf >= cs {
                continue;
            }
            let rejections = traces.iter().filter(|t| t.rejects(cf, cs)).count();
            let type1 = rejections as f64 / traces.len() as f64;
            grid_rows.push((cf, cs, type1));
            if type1 <= opts.alpha {
                let better = match best {
                    None => true,
                    Some((bcf, bcs, bt1)) => (type1, cf, -cs) > (bt1, bcf, -bcs),
                };
                if better {
                    best = Some((cf, cs, type1));
                }
            }
        }
    }
    let (c_f, c_s, achieved_type1) = best.ok_or_else(|| {
        let least = grid_rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
        Error::NoFeasiblePair {
            alpha: opts.alpha,
            best: least,
        }
    })?;

    let confirmation_type1 = match opts.bayes_confirm_trials {
        Some(n) if n > 0 => {
            let confirm_cfg = DesignConfig {
                method: Method::Bayesian,
                ..cfg.clone()
            };
            let confirm = simulate_traces(&confirm_cfg, control, &null, n, SALT_CONFIRM)?;
            Some(
                confirm.iter().filter(|t| t.rejects(c_f, c_s)).count() as f64
                    / confirm.len() as f64,
            )
        }
        _ => None,
    };

    Ok(CalibrationResult {
        c_f,
        c_s,
        achieved_type1,
        grid: grid_rows,
        confirmation_type1,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSizeResult {
    pub n_per_arm_per_stage: u64,
    pub achieved_power: f64,
    pub c_f: f64,
    pub c_s: f64,
    pub achieved_type1: f64,
    /// `(n, power)` for every candidate evaluated, in grid order; the last
    /// entry is the returned size, so the run shows each smaller grid size
    /// failing the target.
    pub evaluated: Vec<(u64, f64)>,
}

/// Smallest per-arm-per-stage size on `n_grid` meeting `power_target` at the
/// given effect, calibrating cutoffs to `alpha` under the null at each
/// candidate size. PO and NPO designs only; the switch design composes the
/// two through [`find_sample_size_switch`].
pub fn find_sample_size(
    template: &DesignConfig,
    effect: &EffectSpec,
    control: &CategoryDistribution,
    alpha: f64,
    power_target: f64,
    n_grid: &[u64],
    n_trials: usize,
) -> Result<SampleSizeResult> {
    if template.design == Design::Switch {
        return Err(Error::InvalidConfig(
            "sample-size search for the switch design composes the PO and NPO searches".into(),
        ));
    }
    if !(0.0..1.0).contains(&power_target) {
        return Err(Error::InvalidConfig(format!(
            "power target {power_target} outside [0, 1)"
        )));
    }
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "sample-size grid must be non-empty and strictly increasing".into(),
        ));
    }

    let mut evaluated = Vec::with_capacity(n_grid.len());
    let mut last = None;
    for &n in n_grid {
        let cfg = DesignConfig {
            stage_sizes: StageSizes::Fixed { per_stage: n },
            ..template.clone()
        };
        let calib = calibrate_thresholds(&cfg, control, &CalibrateOptions::new(alpha, n_trials))?;
        let alt = simulate_traces(&cfg, control, effect, n_trials, SALT_POWER ^ n)?;
        let power = alt
            .iter()
            .filter(|t| t.rejects(calib.c_f, calib.c_s))
            .count() as f64
            / alt.len() as f64;
        evaluated.push((n, power));
        last = Some((n, power, calib));
        if power >= power_target {
            let (n, power, calib) = last.unwrap();
            return Ok(SampleSizeResult {
                n_per_arm_per_stage: n,
                achieved_power: power,
                c_f: calib.c_f,
                c_s: calib.c_s,
                achieved_type1: calib.achieved_type1,
                evaluated,
            });
        }
    }
    let (n, power, _) = last.unwrap();
    Err(Error::TargetUnreachable {
        target: power_target,
        achieved: power,
        at_n: n as usize,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwitchSampleSizeResult {
    pub sizes: SwitchSizes,
    pub c_f: f64,
    pub c_s: f64,
    pub achieved_type1: f64,
    pub power_under_po_effect: f64,
    pub power_under_npo_effect: f64,
    pub po: SampleSizeResult,
    pub npo: SampleSizeResult,
}

/// Size the switch design: find the PO and NPO designs' sizes for their
/// respective alternatives, assemble the model-dependent stage plan (stage 1
/// enrolls the larger of the two), calibrate the switch cutoffs under the
/// null, and report achieved power under both alternatives.
#[allow(clippy::too_many_arguments)]
pub fn find_sample_size_switch(
    template: &DesignConfig,
    po_effect: &EffectSpec,
    npo_effect: &EffectSpec,
    control: &CategoryDistribution,
    alpha: f64,
    power_target: f64,
    po_n_grid: &[u64],
    npo_n_grid: &[u64],
    n_trials: usize,
) -> Result<SwitchSampleSizeResult> {
    let po_template = DesignConfig {
        design: Design::Po,
        stage_sizes: StageSizes::Fixed { per_stage: 1 },
        ..template.clone()
    };
    let npo_template = DesignConfig {
        design: Design::Npo,
        stage_sizes: StageSizes::Fixed { per_stage: 1 },
        ..template.clone()
    };
    let po = find_sample_size(
        &po_template,
        po_effect,
        control,
        alpha,
        power_target,
        po_n_grid,
        n_trials,
    )?;
    let npo = find_sample_size(
        &npo_template,
        npo_effect,
        control,
        alpha,
        power_target,
        npo_n_grid,
        n_trials,
    )?;

    let sizes = SwitchSizes {
        po_stage1: po.n_per_arm_per_stage,
        po_stage2: po.n_per_arm_per_stage,
        npo_stage1: npo.n_per_arm_per_stage,
        npo_stage2: npo.n_per_arm_per_stage,
    };
    let cfg = DesignConfig {
        design: Design::Switch,
        stage_sizes: StageSizes::Switch(sizes),
        ..template.clone()
    };
    let calib = calibrate_thresholds(&cfg, control, &CalibrateOptions::new(alpha, n_trials))?;
    let power_at = |effect: &EffectSpec, salt: u64| -> Result<f64> {
        let traces = simulate_traces(&cfg, control, effect, n_trials, SALT_POWER ^ salt)?;
        Ok(traces
            .iter()
            .filter(|t| t.rejects(calib.c_f, calib.c_s))
            .count() as f64
            / traces.len() as f64)
    };
    Ok(SwitchSampleSizeResult {
        sizes,
        c_f: calib.c_f,
        c_s: calib.c_s,
        achieved_type1: calib.achieved_type1,
        power_under_po_effect: power_at(po_effect, 1)?,
        power_under_npo_effect: power_at(npo_effect, 2)?,
        po,
        npo,
    })
}
