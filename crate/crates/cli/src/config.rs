//! Run configuration: a TOML file plus command-line overrides.
//!
//! Every validation failure names the offending key so batch runs fail loudly
//! and early.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use ordinal_gsd::calibration::CutoffGrid;
use ordinal_gsd::inference::{McmcConfig, PriorSpec};
use ordinal_gsd::ordinal::{CategoryDistribution, EffectSpec, Scenario, UtilityScale};
use ordinal_gsd::rjmcmc::RjConfig;
use ordinal_gsd::trial::{Design, DesignConfig, Method, StageSizes, SwitchSizes};

use crate::CliError;

fn bad(key: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config key `{key}`: {why}"))
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing required config key `{key}`"))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Control-arm category probabilities; defines C.
    pub control: Option<Vec<f64>>,
    /// Utility per outcome level (non-increasing). Defaults to the built-in
    /// six-level clinical scale when C = 6, else to a linear 100..0 ramp.
    pub utility: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub ntrial: Option<usize>,
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub power: Option<f64>,
    /// Per-group per-stage size for the fixed designs.
    pub n: Option<u64>,
    pub c_f: Option<f64>,
    pub c_s: Option<f64>,
    /// Scenario odds ratios, one vector of length C-1 per scenario.
    pub ors: Option<Vec<Vec<f64>>>,
    /// Proportional-odds scenario list (one scalar OR per scenario).
    pub or_list: Option<Vec<f64>>,
    /// Use the built-in eight-scenario catalog (requires C = 6).
    pub catalog: Option<bool>,
    /// Target effect for ss-po / ss-switch (scalar OR).
    pub or_alt: Option<f64>,
    /// Target effect for ss-npo / ss-switch (vector of length C-1).
    pub or_alt_vector: Option<Vec<f64>>,
    /// Candidate per-group-per-stage sizes for ss-*.
    pub n_grid: Option<Vec<u64>>,
    pub npo_n_grid: Option<Vec<u64>>,
    pub switch: Option<SwitchSection>,
    pub curve: Option<CurveSection>,
    pub mcmc: Option<McmcSection>,
    pub priors: Option<PriorSection>,
    pub rj: Option<RjSection>,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchSection {
    /// `[stage1, stage2]` per group under the PO model.
    pub n_po: Vec<u64>,
    /// `[stage1, stage2]` per group under the NPO model.
    pub n_npo: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    /// Which design to sweep: "po", "npo", or "switch".
    pub design: String,
    /// Sweep variable: "or" or "n".
    pub x: String,
    pub or_min: Option<f64>,
    pub or_max: Option<f64>,
    pub or_step: Option<f64>,
    pub n_values: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub n_burn: Option<usize>,
    pub n_keep: Option<usize>,
    pub step_mu: Option<f64>,
    pub step_gamma: Option<f64>,
    pub step_delta: Option<f64>,
    pub adapt: Option<bool>,
    pub fix_mu: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub mu_mean: Option<f64>,
    pub mu_var: Option<f64>,
    pub cutpoint_var: Option<f64>,
    pub delta_var: Option<f64>,
    pub delta_means: Option<Vec<f64>>,
    pub delta_vars: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RjSection {
    pub model_prior_po: Option<f64>,
    pub pseudo_prior_var: Option<f64>,
    pub n_sweeps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub c_f: Option<Vec<f64>>,
    pub c_s: Option<Vec<f64>>,
}

/// Flag overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub ntrial: Option<usize>,
    pub alpha: Option<f64>,
    pub power: Option<f64>,
    pub method: Option<String>,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub control: CategoryDistribution,
    pub utility: UtilityScale,
    pub seed: u64,
    pub ntrial: usize,
    pub method: Method,
    pub alpha: f64,
    pub power: f64,
    pub n: Option<u64>,
    pub cutoffs: Option<(f64, f64)>,
    pub scenarios: Vec<Scenario>,
    pub or_alt: Option<f64>,
    pub or_alt_vector: Option<EffectSpec>,
    pub n_grid: Vec<u64>,
    pub npo_n_grid: Vec<u64>,
    pub switch_sizes: Option<SwitchSizes>,
    pub curve: Option<ResolvedCurve>,
    pub mcmc: McmcConfig,
    pub priors: PriorSpec,
    pub rj: RjConfig,
    pub grid: CutoffGrid,
    #[serde(skip)]
    pub raw: RawConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedCurve {
    pub design: Design,
    pub x_is_or: bool,
    pub or_values: Vec<f64>,
    pub n_values: Vec<u64>,
}

pub fn load(path: &PathBuf, over: &Overrides) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut raw: RawConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
    if over.seed.is_some() {
        raw.seed = over.seed;
    }
    if over.ntrial.is_some() {
        raw.ntrial = over.ntrial;
    }
    if over.alpha.is_some() {
        raw.alpha = over.alpha;
    }
    if over.power.is_some() {
        raw.power = over.power;
    }
    if over.method.is_some() {
        raw.method = over.method.clone();
    }
    Ok(raw)
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "bayesian" => Ok(Method::Bayesian),
        "frequentist" => Ok(Method::Frequentist),
        other => Err(bad(
            "method",
            format!("expected \"Bayesian\" or \"Frequentist\", got \"{other}\""),
        )),
    }
}

fn default_utility(c: usize) -> UtilityScale {
    if c == 6 {
        UtilityScale::clinical_six_level()
    } else {
        let u = (0..c)
            .map(|i| 100.0 * (c - 1 - i) as f64 / (c - 1) as f64)
            .collect();
        UtilityScale::new(u).expect("linear ramp is non-increasing")
    }
}

impl RawConfig {
    pub fn resolve(self) -> Result<ResolvedConfig, CliError> {
        let control_probs = self.control.clone().ok_or_else(|| missing("control"))?;
        let control = CategoryDistribution::new(control_probs).map_err(|e| bad("control", e))?;
        let c = control.n_categories();

        let utility = match &self.utility {
            Some(u) => {
                if u.len() != c {
                    return Err(bad(
                        "utility",
                        format!("needs {c} entries to match `control`, got {}", u.len()),
                    ));
                }
                UtilityScale::new(u.clone()).map_err(|e| bad("utility", e))?
            }
            None => default_utility(c),
        };

        let method = parse_method(self.method.as_deref().unwrap_or("Frequentist"))?;
        let alpha = self.alpha.unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(bad("alpha", format!("{alpha} outside (0, 1)")));
        }
        let power = self.power.unwrap_or(0.8);
        if !(0.0..1.0).contains(&power) {
            return Err(bad("power", format!("{power} outside [0, 1)")));
        }
        let ntrial = self.ntrial.unwrap_or(1000);
        if ntrial == 0 {
            return Err(bad("ntrial", "must be at least 1"));
        }

        let cutoffs = match (self.c_f, self.c_s) {
            (Some(f), Some(s)) => {
                if f.is_nan() || s.is_nan() || f >= s {
                    return Err(bad(
                        "c_f",
                        format!("futility cutoff {f} must be below c_s {s}"),
                    ));
                }
                if !(0.0..=1.0).contains(&f) || !(0.0..=1.0).contains(&s) {
                    return Err(bad("c_s", "cutoffs must lie in [0, 1]"));
                }
                Some((f, s))
            }
            (None, None) => None,
            (Some(_), None) => return Err(missing("c_s")),
            (None, Some(_)) => return Err(missing("c_f")),
        };

        let scenarios = self.build_scenarios(&control, &utility)?;

        let or_alt = match self.or_alt {
            Some(v) if v > 0.0 => Some(v),
            Some(v) => return Err(bad("or_alt", format!("{v} must be positive"))),
            None => None,
        };
        let or_alt_vector = match &self.or_alt_vector {
            Some(v) => {
                if v.len() != c - 1 {
                    return Err(bad(
                        "or_alt_vector",
                        format!("needs {} entries, got {}", c - 1, v.len()),
                    ));
                }
                Some(EffectSpec::new(v.clone()).map_err(|e| bad("or_alt_vector", e))?)
            }
            None => None,
        };

        let n_grid = self
            .n_grid
            .clone()
            .unwrap_or_else(|| (1..=10).map(|i| 20 * i).collect());
        let npo_n_grid = self
            .npo_n_grid
            .clone()
            .unwrap_or_else(|| (1..=8).map(|i| 50 * i).collect());
        for (key, g) in [("n_grid", &n_grid), ("npo_n_grid", &npo_n_grid)] {
            if g.is_empty() || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(bad(key, "must be non-empty and strictly increasing"));
            }
        }

        let switch_sizes = match &self.switch {
            Some(s) => {
                if s.n_po.len() != 2 {
                    return Err(bad("switch.n_po", "expected [stage1, stage2]"));
                }
                if s.n_npo.len() != 2 {
                    return Err(bad("switch.n_npo", "expected [stage1, stage2]"));
                }
                Some(SwitchSizes {
                    po_stage1: s.n_po[0],
                    po_stage2: s.n_po[1],
                    npo_stage1: s.n_npo[0],
                    npo_stage2: s.n_npo[1],
                })
            }
            None => None,
        };

        let curve = match &self.curve {
            Some(cv) => Some(self.resolve_curve(cv)?),
            None => None,
        };

        let mcmc = {
            let mut m = McmcConfig::default();
            if let Some(s) = &self.mcmc {
                if let Some(v) = s.n_burn {
                    m.n_burn = v;
                }
                if let Some(v) = s.n_keep {
                    m.n_keep = v;
                }
                if let Some(v) = s.step_mu {
                    m.step_mu = v;
                }
                if let Some(v) = s.step_gamma {
                    m.step_gamma = v;
                }
                if let Some(v) = s.step_delta {
                    m.step_delta = v;
                }
                if let Some(v) = s.adapt {
                    m.adapt = v;
                }
                if let Some(v) = s.fix_mu {
                    m.fix_mu = v;
                }
            }
            m.validate().map_err(|e| bad("mcmc", e))?;
            m
        };

        let priors = {
            let mut p = PriorSpec::defaults(c);
            if let Some(s) = &self.priors {
                if let Some(v) = s.mu_mean {
                    p.mu_mean = v;
                }
                if let Some(v) = s.mu_var {
                    p.mu_var = v;
                }
                if let Some(v) = s.cutpoint_var {
                    p.cutpoint_var = v;
                }
                if let Some(v) = s.delta_var {
                    p.delta_vars = vec![v; c - 1];
                }
                if let Some(v) = &s.delta_means {
                    p.delta_means = v.clone();
                }
                if let Some(v) = &s.delta_vars {
                    p.delta_vars = v.clone();
                }
            }
            p.validate(c).map_err(|e| bad("priors", e))?;
            p
        };

        let rj = {
            let mut r = RjConfig::default();
            if let Some(s) = &self.rj {
                if let Some(v) = s.model_prior_po {
                    r.model_prior_po = v;
                }
                if let Some(v) = s.pseudo_prior_var {
                    r.pseudo_prior_var = v;
                }
                if let Some(v) = s.n_sweeps {
                    r.n_sweeps = v;
                }
            }
            r.validate().map_err(|e| bad("rj", e))?;
            r
        };

        let grid = {
            let mut g = CutoffGrid::default();
            if let Some(s) = &self.grid {
                if let Some(v) = &s.c_f {
                    g.c_f = v.clone();
                }
                if let Some(v) = &s.c_s {
                    g.c_s = v.clone();
                }
            }
            g.validate().map_err(|e| bad("grid", e))?;
            g
        };

        Ok(ResolvedConfig {
            control,
            utility,
            seed: self.seed.unwrap_or(0),
            ntrial,
            method,
            alpha,
            power,
            n: self.n,
            cutoffs,
            scenarios,
            or_alt,
            or_alt_vector,
            n_grid,
            npo_n_grid,
            switch_sizes,
            curve,
            mcmc,
            priors,
            rj,
            grid,
            raw: self,
        })
    }

    fn build_scenarios(
        &self,
        control: &CategoryDistribution,
        utility: &UtilityScale,
    ) -> Result<Vec<Scenario>, CliError> {
        let c = control.n_categories();
        let mut effects: Vec<(String, EffectSpec)> = Vec::new();
        if self.catalog.unwrap_or(false) {
            if c != 6 {
                return Err(bad(
                    "catalog",
                    "the built-in catalog needs 6 outcome levels",
                ));
            }
            for s in ordinal_gsd::ordinal::scenario_catalog() {
                effects.push((s.id.clone(), s.effect.clone()));
            }
        }
        if let Some(list) = &self.or_list {
            for (i, &or) in list.iter().enumerate() {
                if or <= 0.0 {
                    return Err(bad("or_list", format!("entry {} not positive", i + 1)));
                }
                effects.push((
                    format!("{}", effects.len() + 1),
                    EffectSpec::proportional(or, c).map_err(|e| bad("or_list", e))?,
                ));
            }
        }
        if let Some(rows) = &self.ors {
            for row in rows {
                if row.len() != c - 1 {
                    return Err(bad(
                        "ors",
                        format!("each row needs {} entries, got {}", c - 1, row.len()),
                    ));
                }
                effects.push((
                    format!("{}", effects.len() + 1),
                    EffectSpec::new(row.clone()).map_err(|e| bad("ors", e))?,
                ));
            }
        }
        effects
            .into_iter()
            .map(|(id, e)| {
                Scenario::new(id, control.clone(), e, utility).map_err(|e| bad("ors", e))
            })
            .collect()
    }

    fn resolve_curve(&self, cv: &CurveSection) -> Result<ResolvedCurve, CliError> {
        let design = match cv.design.to_ascii_lowercase().as_str() {
            "po" => Design::Po,
            "npo" => Design::Npo,
            "switch" => Design::Switch,
            other => {
                return Err(bad(
                    "curve.design",
                    format!("expected po/npo/switch, got \"{other}\""),
                ))
            }
        };
        match cv.x.to_ascii_lowercase().as_str() {
            "or" => {
                let lo = cv.or_min.unwrap_or(1.0);
                let hi = cv.or_max.unwrap_or(2.0);
                let step = cv.or_step.unwrap_or(0.05);
                if !(lo > 0.0 && hi >= lo && step > 0.0) {
                    return Err(bad(
                        "curve.or_min",
                        "need 0 < or_min <= or_max and or_step > 0",
                    ));
                }
                let mut or_values = Vec::new();
                let mut v = lo;
                while v <= hi + 1e-9 {
                    or_values.push((v * 1e9).round() / 1e9);
                    v += step;
                }
                Ok(ResolvedCurve {
                    design,
                    x_is_or: true,
                    or_values,
                    n_values: Vec::new(),
                })
            }
            "n" => {
                let n_values = cv
                    .n_values
                    .clone()
                    .ok_or_else(|| missing("curve.n_values"))?;
                if n_values.is_empty() {
                    return Err(bad("curve.n_values", "must be non-empty"));
                }
                Ok(ResolvedCurve {
                    design,
                    x_is_or: false,
                    or_values: Vec::new(),
                    n_values,
                })
            }
            other => Err(bad(
                "curve.x",
                format!("expected \"or\" or \"n\", got \"{other}\""),
            )),
        }
    }
}

impl ResolvedConfig {
    /// Assemble a DesignConfig for a fixed-size design.
    pub fn design_config(&self, design: Design, per_stage: u64) -> DesignConfig {
        DesignConfig {
            design,
            n_categories: self.control.n_categories(),
            stage_sizes: StageSizes::Fixed { per_stage },
            c_f: self.cutoffs.map(|c| c.0).unwrap_or(0.0),
            c_s: self.cutoffs.map(|c| c.1).unwrap_or(1.0),
            priors: self.priors.clone(),
            mcmc: self.mcmc.clone(),
            utility: self.utility.clone(),
            method: self.method,
            rj: self.rj.clone(),
            seed: self.seed,
        }
    }

    pub fn switch_config(&self, sizes: SwitchSizes) -> DesignConfig {
        DesignConfig {
            design: Design::Switch,
            stage_sizes: StageSizes::Switch(sizes),
            ..self.design_config(Design::Po, 1)
        }
    }
}
