//! Command implementations: operating characteristics, sample-size search,
//! and power curves, with CSV/JSON artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use ordinal_gsd::calibration::{
    calibrate_thresholds, find_sample_size, find_sample_size_switch, CalibrateOptions,
    CalibrationResult, SampleSizeResult, SwitchSampleSizeResult,
};
use ordinal_gsd::error::Error as CoreError;
use ordinal_gsd::ordinal::{EffectSpec, Scenario};
use ordinal_gsd::trial::{
    operating_characteristics, Design, DesignConfig, OperatingCharacteristics, SwitchSizes,
    TrialOutcome,
};

use crate::config::{RawConfig, ResolvedConfig};
use crate::report::{
    effect_size_of, fmt_sig4, print_table, rows_to_csv, ReportRow, ScenarioSummary,
};
use crate::CliError;

pub struct OutputSink {
    pub dir: PathBuf,
    pub overwrite: bool,
}

impl OutputSink {
    fn prepare(&self) -> Result<(), CliError> {
        if self.dir.exists() {
            let occupied = std::fs::read_dir(&self.dir)
                .map(|mut it| it.next().is_some())
                .unwrap_or(false);
            if occupied && !self.overwrite {
                return Err(CliError::Config(format!(
                    "output directory {} already has contents; pass --overwrite or choose a fresh --out",
                    self.dir.display()
                )));
            }
        }
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Run(format!("cannot create {}: {e}", self.dir.display())))?;
        Ok(())
    }

    fn write(&self, name: &str, content: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::NoFeasiblePair { .. } | CoreError::TargetUnreachable { .. } => {
            CliError::Unreachable(e.to_string())
        }
        other => CliError::Run(other.to_string()),
    }
}

#[derive(Serialize)]
struct CalibrationEcho {
    c_f: f64,
    c_s: f64,
    achieved_type1: Option<f64>,
    from_grid_search: bool,
}

#[derive(Serialize)]
struct OcDocument<'a> {
    command: &'a str,
    seed: u64,
    config: &'a RawConfig,
    calibration: CalibrationEcho,
    rows: &'a [ReportRow],
    scenarios: &'a [ScenarioSummary],
    #[serde(skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<Vec<TrialOutcome>>>,
}

fn summarize(scenario: &Scenario, oc: &OperatingCharacteristics) -> ScenarioSummary {
    let count = |d| oc.outcomes.iter().filter(|o| o.decision == d).count();
    use ordinal_gsd::trial::Decision::*;
    ScenarioSummary {
        scenario: scenario.id.clone(),
        odds_ratios: scenario.effect.odds_ratios().to_vec(),
        mean_utility_difference: scenario.mean_utility_difference,
        pet_percent: oc.pet,
        prn_percent: oc.prn,
        avg_n_per_arm: oc.avg_n_per_arm,
        avg_n_total: oc.avg_n_total,
        n_trials: oc.n_trials,
        n_valid: oc.n_valid,
        reruns: oc.reruns,
        stopped_futile: count(StoppedFutile),
        superior: count(Superior),
        not_effective: count(NotEffective),
    }
}

/// Resolve cutoffs: explicit from the config, or grid-calibrated under the
/// null at the design's sizes.
fn resolve_cutoffs(
    cfg: &ResolvedConfig,
    design_cfg: &DesignConfig,
) -> Result<(f64, f64, CalibrationEcho), CliError> {
    if let Some((c_f, c_s)) = cfg.cutoffs {
        return Ok((
            c_f,
            c_s,
            CalibrationEcho {
                c_f,
                c_s,
                achieved_type1: None,
                from_grid_search: false,
            },
        ));
    }
    let opts = CalibrateOptions {
        alpha: cfg.alpha,
        grid: cfg.grid.clone(),
        n_trials: cfg.ntrial,
        bayes_confirm_trials: None,
    };
    let res: CalibrationResult =
        calibrate_thresholds(design_cfg, &cfg.control, &opts).map_err(core_err)?;
    eprintln!(
        "calibrated cutoffs: c_f = {}, c_s = {} (null rejection rate {:.4})",
        res.c_f, res.c_s, res.achieved_type1
    );
    Ok((
        res.c_f,
        res.c_s,
        CalibrationEcho {
            c_f: res.c_f,
            c_s: res.c_s,
            achieved_type1: Some(res.achieved_type1),
            from_grid_search: true,
        },
    ))
}

pub fn run_oc(
    command: &str,
    design: Design,
    cfg: &ResolvedConfig,
    sink: &OutputSink,
    full_log: bool,
) -> Result<(), CliError> {
    if cfg.scenarios.is_empty() {
        return Err(CliError::Config(
            "no scenarios: set `catalog = true`, `or_list`, or `ors`".into(),
        ));
    }
    let mut design_cfg = match design {
        Design::Switch => {
            let sizes = cfg.switch_sizes.ok_or_else(|| {
                CliError::Config("missing required config section `switch`".into())
            })?;
            cfg.switch_config(sizes)
        }
        _ => {
            let n = cfg
                .n
                .ok_or_else(|| CliError::Config("missing required config key `n`".into()))?;
            cfg.design_config(design, n)
        }
    };
    let (c_f, c_s, calibration) = resolve_cutoffs(cfg, &design_cfg)?;
    design_cfg.c_f = c_f;
    design_cfg.c_s = c_s;
    design_cfg.validate().map_err(core_err)?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut all_outcomes = Vec::new();
    for scenario in &cfg.scenarios {
        let oc = operating_characteristics(&design_cfg, scenario, cfg.ntrial).map_err(core_err)?;
        rows.push(ReportRow::new(&scenario.id, effect_size_of(scenario), &oc));
        summaries.push(summarize(scenario, &oc));
        if full_log {
            all_outcomes.push(oc.outcomes);
        }
    }

    sink.prepare()?;
    let doc = OcDocument {
        command,
        seed: cfg.seed,
        config: &cfg.raw,
        calibration,
        rows: &rows,
        scenarios: &summaries,
        outcomes: if full_log { Some(all_outcomes) } else { None },
    };
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Run(format!("JSON serialization failed: {e}")))?;
    let csv_path = sink.write("results.csv", &rows_to_csv(&rows))?;
    let json_path = sink.write("result.json", &json)?;
    write_config_echo(sink, &cfg.raw)?;

    print_table(&rows);
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

#[derive(Serialize)]
struct SsDocument<'a> {
    command: &'a str,
    seed: u64,
    config: &'a RawConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a SampleSizeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    switch_result: Option<&'a SwitchSampleSizeResult>,
}

fn evaluated_csv(evaluated: &[(u64, f64)]) -> String {
    let mut out = String::from("n_per_arm_per_stage,power\n");
    for (n, p) in evaluated {
        out.push_str(&format!("{n},{}\n", fmt_sig4(*p)));
    }
    out
}

pub fn run_ss(
    command: &str,
    design: Design,
    cfg: &ResolvedConfig,
    sink: &OutputSink,
) -> Result<(), CliError> {
    match design {
        Design::Switch => run_ss_switch(command, cfg, sink),
        _ => {
            let effect = match design {
                Design::Po => {
                    let or = cfg.or_alt.ok_or_else(|| {
                        CliError::Config("missing required config key `or_alt`".into())
                    })?;
                    EffectSpec::proportional(or, cfg.control.n_categories()).map_err(core_err)?
                }
                _ => cfg.or_alt_vector.clone().ok_or_else(|| {
                    CliError::Config("missing required config key `or_alt_vector`".into())
                })?,
            };
            let grid = match design {
                Design::Npo => &cfg.npo_n_grid,
                _ => &cfg.n_grid,
            };
            let template = cfg.design_config(design, grid[0]);
            let result = find_sample_size(
                &template,
                &effect,
                &cfg.control,
                cfg.alpha,
                cfg.power,
                grid,
                cfg.ntrial,
            )
            .map_err(core_err)?;

            println!(
                "Calibrated cutoffs: futility {} / superiority {} (type I error {}).",
                fmt_sig4(result.c_f),
                fmt_sig4(result.c_s),
                fmt_sig4(result.achieved_type1)
            );
            println!(
                "Recommended sample size: {} per group at each stage (power {}).",
                result.n_per_arm_per_stage,
                fmt_sig4(result.achieved_power)
            );

            sink.prepare()?;
            let doc = SsDocument {
                command,
                seed: cfg.seed,
                config: &cfg.raw,
                result: Some(&result),
                switch_result: None,
            };
            sink.write(
                "result.json",
                &serde_json::to_string_pretty(&doc).map_err(|e| CliError::Run(e.to_string()))?,
            )?;
            sink.write("power_by_n.csv", &evaluated_csv(&result.evaluated))?;
            write_config_echo(sink, &cfg.raw)?;
            Ok(())
        }
    }
}

fn run_ss_switch(command: &str, cfg: &ResolvedConfig, sink: &OutputSink) -> Result<(), CliError> {
    let or = cfg
        .or_alt
        .ok_or_else(|| CliError::Config("missing required config key `or_alt`".into()))?;
    let po_effect = EffectSpec::proportional(or, cfg.control.n_categories()).map_err(core_err)?;
    let npo_effect = cfg
        .or_alt_vector
        .clone()
        .ok_or_else(|| CliError::Config("missing required config key `or_alt_vector`".into()))?;
    let template = cfg.switch_config(SwitchSizes {
        po_stage1: 1,
        po_stage2: 1,
        npo_stage1: 1,
        npo_stage2: 1,
    });
    let result = find_sample_size_switch(
        &template,
        &po_effect,
        &npo_effect,
        &cfg.control,
        cfg.alpha,
        cfg.power,
        &cfg.n_grid,
        &cfg.npo_n_grid,
        cfg.ntrial,
    )
    .map_err(core_err)?;

    println!(
        "Component sizes: PO {} per group per stage, NPO {} per group per stage.",
        result.sizes.po_stage1, result.sizes.npo_stage1
    );
    println!(
        "Stage 1 enrolls {} per group; stage 2 follows the selected model.",
        result.sizes.stage1()
    );
    println!(
        "Calibrated cutoffs: futility {} / superiority {} (type I error {}).",
        fmt_sig4(result.c_f),
        fmt_sig4(result.c_s),
        fmt_sig4(result.achieved_type1)
    );
    println!(
        "Power: {} under the proportional alternative, {} under the non-proportional one.",
        fmt_sig4(result.power_under_po_effect),
        fmt_sig4(result.power_under_npo_effect)
    );

    sink.prepare()?;
    let doc = SsDocument {
        command,
        seed: cfg.seed,
        config: &cfg.raw,
        result: None,
        switch_result: Some(&result),
    };
    sink.write(
        "result.json",
        &serde_json::to_string_pretty(&doc).map_err(|e| CliError::Run(e.to_string()))?,
    )?;
    write_config_echo(sink, &cfg.raw)?;
    Ok(())
}

#[derive(Serialize)]
struct CurvePoint {
    x: f64,
    power: f64,
    pet_percent: f64,
    avg_n_per_arm: f64,
}

#[derive(Serialize)]
struct CurveDocument<'a> {
    command: &'a str,
    seed: u64,
    config: &'a RawConfig,
    x_axis: &'a str,
    c_f: f64,
    c_s: f64,
    points: &'a [CurvePoint],
}

pub fn run_power_curve(cfg: &ResolvedConfig, sink: &OutputSink) -> Result<(), CliError> {
    let curve = cfg
        .curve
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required config section `curve`".into()))?;
    let (c_f, c_s) = cfg.cutoffs.ok_or_else(|| {
        CliError::Config("power-curve needs explicit `c_f` and `c_s` cutoffs".into())
    })?;
    let c = cfg.control.n_categories();

    let mut points = Vec::new();
    if curve.x_is_or {
        let base = match curve.design {
            Design::Switch => {
                let sizes = cfg.switch_sizes.ok_or_else(|| {
                    CliError::Config("missing required config section `switch`".into())
                })?;
                cfg.switch_config(sizes)
            }
            d => {
                let n = cfg
                    .n
                    .ok_or_else(|| CliError::Config("missing required config key `n`".into()))?;
                cfg.design_config(d, n)
            }
        };
        let mut design_cfg = base;
        design_cfg.c_f = c_f;
        design_cfg.c_s = c_s;
        for &or in &curve.or_values {
            let effect = EffectSpec::proportional(or, c).map_err(core_err)?;
            let scenario = Scenario::new(
                format!("or={or}"),
                cfg.control.clone(),
                effect,
                &cfg.utility,
            )
            .map_err(core_err)?;
            let oc =
                operating_characteristics(&design_cfg, &scenario, cfg.ntrial).map_err(core_err)?;
            points.push(CurvePoint {
                x: or,
                power: oc.prn / 100.0,
                pet_percent: oc.pet,
                avg_n_per_arm: oc.avg_n_per_arm,
            });
        }
    } else {
        let effect = match (&cfg.or_alt_vector, cfg.or_alt) {
            (Some(v), _) => v.clone(),
            (None, Some(or)) => EffectSpec::proportional(or, c).map_err(core_err)?,
            (None, None) => {
                return Err(CliError::Config(
                    "curve over n needs `or_alt` or `or_alt_vector`".into(),
                ))
            }
        };
        let scenario =
            Scenario::new("alt", cfg.control.clone(), effect, &cfg.utility).map_err(core_err)?;
        for &n in &curve.n_values {
            let mut design_cfg = match curve.design {
                Design::Switch => cfg.switch_config(SwitchSizes {
                    po_stage1: n,
                    po_stage2: n,
                    npo_stage1: n,
                    npo_stage2: n,
                }),
                d => cfg.design_config(d, n),
            };
            design_cfg.c_f = c_f;
            design_cfg.c_s = c_s;
            let oc =
                operating_characteristics(&design_cfg, &scenario, cfg.ntrial).map_err(core_err)?;
            points.push(CurvePoint {
                x: n as f64,
                power: oc.prn / 100.0,
                pet_percent: oc.pet,
                avg_n_per_arm: oc.avg_n_per_arm,
            });
        }
    }

    let x_axis = if curve.x_is_or { "or" } else { "n" };
    sink.prepare()?;
    let mut csv = format!("{x_axis},power\n");
    for p in &points {
        csv.push_str(&format!("{},{}\n", p.x, fmt_sig4(p.power)));
    }
    sink.write("power_curve.csv", &csv)?;
    let doc = CurveDocument {
        command: "power-curve",
        seed: cfg.seed,
        config: &cfg.raw,
        x_axis,
        c_f,
        c_s,
        points: &points,
    };
    sink.write(
        "result.json",
        &serde_json::to_string_pretty(&doc).map_err(|e| CliError::Run(e.to_string()))?,
    )?;
    write_config_echo(sink, &cfg.raw)?;

    println!("{x_axis:>8}  power");
    for p in &points {
        println!("{:>8}  {}", p.x, fmt_sig4(p.power));
    }
    Ok(())
}

fn write_config_echo(sink: &OutputSink, raw: &RawConfig) -> Result<(), CliError> {
    let text = toml::to_string(raw)
        .map_err(|e| CliError::Run(format!("config echo serialization failed: {e}")))?;
    sink.write("config.toml", &text)?;
    Ok(())
}

/// Shared artifact check used by tests: an output directory is reusable only
/// with an explicit overwrite.
pub fn sink_for(dir: &Path, overwrite: bool) -> OutputSink {
    OutputSink {
        dir: dir.to_path_buf(),
        overwrite,
    }
}
