//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Monte Carlo checks use 1000 trials and fixed seeds. Several checks assert
//! published table values that are internally inconsistent in the source
//! material; those tests state the expectation as published and are allowed
//! to fail loudly rather than being weakened. Each failure message carries
//! the measured value and the published target.

use std::process::Command;

use ordinal_gsd::inference::{
    fit, log_likelihood_po, ArmData, McmcConfig, Model, PriorSpec, TrialData,
};
use ordinal_gsd::math::{determinant, mix_seed, normal_log_pdf};
use ordinal_gsd::ordinal::{
    apply_odds_ratios, control_p0, mean_utility, scenario_catalog, CategoryDistribution,
    EffectSpec, UtilityScale,
};
use ordinal_gsd::rjmcmc::{g2, g2_inverse, jacobian_magnitude, select_model, Palette, RjConfig};
use ordinal_gsd::trial::{
    operating_characteristics, Design, DesignConfig, Method, OperatingCharacteristics, StageSizes,
    SwitchSizes,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn pass(line: &str) {
    eprintln!("[PASS] {line}");
}

fn check(ok: bool, line: &str) {
    if ok {
        pass(line);
    } else {
        panic!("[FAIL] {line}");
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: deterministic math.
// ---------------------------------------------------------------------------

#[test]
fn c1_deterministic_math() {
    // Mean utility of the control distribution is exact.
    let u = mean_utility(&control_p0(), &UtilityScale::clinical_six_level()).unwrap();
    check(
        (u - 74.20).abs() < 1e-12,
        &format!("criterion 1: mean utility of the control row = {u} (exact 74.20)"),
    );

    // Palette bijection round trip to 1e-12.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for k in 2..=7 {
        for _ in 0..100 {
            let psi: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
            let (d, uvec) = g2(&Palette(psi.clone()));
            let back = g2_inverse(d, &uvec);
            for (a, b) in back.0.iter().zip(&psi) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(
        worst < 1e-12,
        &format!("criterion 1: bijection round-trip error {worst:.2e} < 1e-12"),
    );

    // Jacobian magnitude vs numeric determinant for C in 3..=8.
    let mut worst_j: f64 = 0.0;
    for c in 3..=8usize {
        let k = c - 1;
        let psi: Vec<f64> = (0..k).map(|i| 0.3 * i as f64 - 0.5).collect();
        let h = 1e-6;
        let flat = |p: &[f64]| {
            let (d, u) = g2(&Palette(p.to_vec()));
            let mut v = vec![d];
            v.extend(u);
            v
        };
        let mut jac = vec![0.0; k * k];
        for col in 0..k {
            let mut up = psi.clone();
            up[col] += h;
            let mut dn = psi.clone();
            dn[col] -= h;
            let (fu, fd) = (flat(&up), flat(&dn));
            for row in 0..k {
                jac[row * k + col] = (fu[row] - fd[row]) / (2.0 * h);
            }
        }
        worst_j =
            worst_j.max((determinant(&jac, k).abs() - jacobian_magnitude(Model::Po, c)).abs());
    }
    check(
        worst_j < 1e-8,
        &format!("criterion 1: |J2| vs finite differences, worst error {worst_j:.2e} < 1e-8"),
    );
}

/// Published probability rows P_1..P_7 against the transform at the
/// odds ratios the scenario table footnotes assign to them. The published
/// mean-utility column identifies the rows as actually generated at ORs
/// 1.2/1.3/1.4/1.5 (not 1.2/1.4/1.6/1.8), and rows 6-7 are mis-rounded in
/// print, so this check fails for P_2..P_4, P_6, and P_7 as published; the
/// companion test below pins the verified generating vectors.
#[test]
fn c1_table1a_rows_from_footnoted_ors() {
    let rows: [(&str, Vec<f64>, [f64; 6]); 7] = [
        ("P_1", vec![1.2; 5], [0.62, 0.05, 0.16, 0.03, 0.04, 0.11]),
        ("P_2", vec![1.4; 5], [0.64, 0.05, 0.15, 0.03, 0.03, 0.10]),
        ("P_3", vec![1.6; 5], [0.66, 0.05, 0.14, 0.02, 0.03, 0.10]),
        ("P_4", vec![1.8; 5], [0.67, 0.04, 0.14, 0.02, 0.03, 0.09]),
        (
            "P_5",
            vec![1.5, 1.5, 1.1, 1.1, 1.1],
            [0.67, 0.04, 0.10, 0.03, 0.04, 0.12],
        ),
        (
            "P_6",
            vec![1.5, 1.5, 1.2, 1.2, 1.2],
            [0.67, 0.04, 0.10, 0.03, 0.04, 0.11],
        ),
        (
            "P_7",
            vec![1.5, 1.5, 1.3, 1.3, 1.3],
            [0.67, 0.04, 0.11, 0.03, 0.04, 0.11],
        ),
    ];
    let control = control_p0();
    let mut failures = Vec::new();
    for (name, ors, printed) in &rows {
        let out = apply_odds_ratios(&control, &EffectSpec::new(ors.clone()).unwrap()).unwrap();
        let worst = out
            .probs()
            .iter()
            .zip(printed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if worst > 0.005 {
            failures.push(format!("{name}: worst entry deviation {worst:.4}"));
        }
    }
    check(
        failures.is_empty(),
        &format!(
            "criterion 1: published rows P_1-P_7 within 0.005 of footnoted ORs ({})",
            if failures.is_empty() {
                "all rows".to_string()
            } else {
                failures.join("; ")
            }
        ),
    );
}

/// The published mean-utility column pins the generating effect of every row;
/// under those effects all seven rows and all seven utilities reproduce.
#[test]
fn c1_table1a_rows_from_verified_generating_ors() {
    let rows: [(&str, Vec<f64>, [f64; 6], f64); 7] = [
        (
            "P_1",
            vec![1.2; 5],
            [0.62, 0.05, 0.16, 0.03, 0.04, 0.11],
            77.35,
        ),
        (
            "P_2",
            vec![1.3; 5],
            [0.64, 0.05, 0.15, 0.03, 0.03, 0.10],
            78.65,
        ),
        (
            "P_3",
            vec![1.4; 5],
            [0.66, 0.05, 0.14, 0.02, 0.03, 0.10],
            79.81,
        ),
        (
            "P_4",
            vec![1.5; 5],
            [0.67, 0.04, 0.14, 0.02, 0.03, 0.09],
            80.85,
        ),
        (
            "P_5",
            vec![1.5, 1.5, 1.1, 1.1, 1.1],
            [0.67, 0.04, 0.10, 0.03, 0.04, 0.12],
            78.31,
        ),
        (
            "P_6",
            vec![1.5, 1.5, 1.2, 1.2, 1.2],
            [0.67, 0.04, 0.10, 0.03, 0.04, 0.11],
            79.08,
        ),
        (
            "P_7",
            vec![1.5, 1.5, 1.3, 1.3, 1.3],
            [0.67, 0.04, 0.11, 0.03, 0.04, 0.11],
            79.74,
        ),
    ];
    let control = control_p0();
    let scale = UtilityScale::clinical_six_level();
    for (name, ors, printed, printed_utility) in &rows {
        let out = apply_odds_ratios(&control, &EffectSpec::new(ors.clone()).unwrap()).unwrap();
        let u = mean_utility(&out, &scale).unwrap();
        assert!(
            (u - printed_utility).abs() < 0.005,
            "{name}: exact mean utility {u} vs published {printed_utility}"
        );
        // Rows reproduce within print rounding plus the two mis-rounded
        // entries in rows 6-7 (worst published rounding error is 0.0101).
        let worst = out
            .probs()
            .iter()
            .zip(printed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 0.0105, "{name}: worst deviation {worst:.4}");
    }
    pass("criterion 1 (companion): all seven rows and utilities reproduce under the verified generating ORs");
}

// ---------------------------------------------------------------------------
// Criterion 2: posterior oracle.
// ---------------------------------------------------------------------------

#[test]
fn c2_posterior_oracle() {
    let data = TrialData::new(
        ArmData::new(vec![2, 2, 1]).unwrap(),
        ArmData::new(vec![3, 1, 1]).unwrap(),
    )
    .unwrap();
    const VAR: f64 = 4.0;
    const G_LO: f64 = -6.0;
    const G_HI: f64 = 6.0;
    const D_LO: f64 = -7.0;
    const D_HI: f64 = 7.0;
    const CELLS: usize = 6;
    const SUB: usize = 6;

    // Midpoint quadrature over the coarse cells.
    let n = CELLS * SUB;
    let hg = (G_HI - G_LO) / n as f64;
    let hd = (D_HI - D_LO) / n as f64;
    let mut cells = vec![0.0; CELLS * CELLS * CELLS];
    let mut total = 0.0;
    for i in 0..n {
        let g1 = G_LO + (i as f64 + 0.5) * hg;
        for j in 0..n {
            let g2v = G_LO + (j as f64 + 0.5) * hg;
            for k in 0..n {
                let d = D_LO + (k as f64 + 0.5) * hd;
                let ll = log_likelihood_po(&data, 0.0, &[g1, g2v], d);
                if ll == f64::NEG_INFINITY {
                    continue;
                }
                let w = (ll
                    + normal_log_pdf(g1, 0.0, VAR)
                    + normal_log_pdf(g2v, 0.0, VAR)
                    + normal_log_pdf(d, 0.0, VAR))
                .exp();
                total += w;
                cells[((i / SUB) * CELLS + j / SUB) * CELLS + k / SUB] += w;
            }
        }
    }
    for c in &mut cells {
        *c /= total;
    }

    let priors = PriorSpec {
        mu_mean: 0.0,
        mu_var: 1.0,
        cutpoint_var: VAR,
        delta_means: vec![0.0; 2],
        delta_vars: vec![VAR; 2],
    };
    let cfg = McmcConfig {
        n_burn: 5_000,
        n_keep: 300_000,
        fix_mu: true,
        ..Default::default()
    };
    let draws = fit(
        &data,
        Model::Po,
        &priors,
        &cfg,
        &mut ChaCha8Rng::seed_from_u64(22),
    )
    .unwrap();

    let idx = |x: f64, lo: f64, hi: f64| -> Option<usize> {
        (x >= lo && x < hi).then(|| (((x - lo) / (hi - lo) * CELLS as f64) as usize).min(CELLS - 1))
    };
    let mut counts = vec![0usize; CELLS * CELLS * CELLS];
    let mut inside = 0usize;
    for i in 0..draws.n_draws() {
        let g = draws.gamma(i);
        let d = draws.effect(i)[0];
        if let (Some(a), Some(b), Some(c)) = (
            idx(g[0], G_LO, G_HI),
            idx(g[1], G_LO, G_HI),
            idx(d, D_LO, D_HI),
        ) {
            counts[(a * CELLS + b) * CELLS + c] += 1;
            inside += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (i, &q) in cells.iter().enumerate() {
        worst = worst.max((counts[i] as f64 / inside as f64 - q).abs());
    }
    check(
        worst < 0.03,
        &format!("criterion 2: worst posterior cell deviation {worst:.4} < 0.03"),
    );
}

// ---------------------------------------------------------------------------
// Shared Monte Carlo plumbing for criteria 3-5.
// ---------------------------------------------------------------------------

const N_TRIALS: usize = 1000;

fn po_config(seed: u64) -> DesignConfig {
    let mut cfg = DesignConfig::new(Design::Po, 6, 100, 0.2, 0.95);
    cfg.seed = seed;
    cfg
}

fn npo_config(seed: u64) -> DesignConfig {
    let mut cfg = DesignConfig::new(Design::Npo, 6, 100, 0.2, 0.86);
    cfg.seed = seed;
    cfg
}

/// Switch plan: PO component sized like the PO design runs (100/stage), NPO
/// component at the top of the published size sweep (400/stage); cutoffs from
/// the published threshold table.
fn switch_config(seed: u64) -> DesignConfig {
    let mut cfg = DesignConfig::new(Design::Switch, 6, 0, 0.2, 0.97);
    cfg.stage_sizes = StageSizes::Switch(SwitchSizes {
        po_stage1: 100,
        po_stage2: 100,
        npo_stage1: 400,
        npo_stage2: 400,
    });
    cfg.seed = seed;
    cfg
}

fn run_oc(cfg: &DesignConfig, scenario_index: usize) -> OperatingCharacteristics {
    let scenarios = scenario_catalog();
    operating_characteristics(cfg, &scenarios[scenario_index], N_TRIALS).unwrap()
}

// ---------------------------------------------------------------------------
// Criterion 3: type I error at the published thresholds.
// ---------------------------------------------------------------------------

#[test]
fn c3_type1_po_design() {
    let oc = run_oc(&po_config(3001), 0);
    let t1 = oc.prn / 100.0;
    check(
        (0.02..=0.08).contains(&t1),
        &format!("criterion 3: PO type I at (0.2, 0.95) = {t1:.4}, window [0.02, 0.08]"),
    );
}

/// The published NPO threshold pair (0.2, 0.86) was calibrated under a
/// decision statistic whose null distribution is concentrated below uniform;
/// an honestly near-uniform posterior probability puts the type I error near
/// Pr(final > 0.86) ~ 0.12. Expected to fail as published.
#[test]
fn c3_type1_npo_design() {
    let oc = run_oc(&npo_config(3002), 0);
    let t1 = oc.prn / 100.0;
    check(
        (0.01..=0.06).contains(&t1),
        &format!("criterion 3: NPO type I at (0.2, 0.86) = {t1:.4}, window [0.01, 0.06]"),
    );
}

#[test]
fn c3_type1_switch_design() {
    let oc = run_oc(&switch_config(3003), 0);
    let t1 = oc.prn / 100.0;
    check(
        (0.02..=0.08).contains(&t1),
        &format!("criterion 3: switch type I at (0.2, 0.97) = {t1:.4}, window [0.02, 0.08]"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: operating-characteristics regression.
// ---------------------------------------------------------------------------

#[test]
fn c4_po_scenario5_power() {
    let oc = run_oc(&po_config(4001), 4);
    check(
        (83.0..=99.0).contains(&oc.prn) && oc.pet <= 5.0,
        &format!(
            "criterion 4: PO scenario 5 PRN {:.1} in 91+/-8 and PET {:.1} <= 5",
            oc.prn, oc.pet
        ),
    );
}

/// Published null-scenario PET of 68% implies the interim statistic falls
/// below 0.2 in two-thirds of null trials; a calibrated posterior probability
/// is near-uniform under the null, capping PET near 20% (and near 35% under
/// any prior shrinkage whatsoever). Expected to fail as published.
#[test]
fn c4_po_scenario1_pet_and_sample_size() {
    let oc = run_oc(&po_config(4002), 0);
    check(
        (58.0..=78.0).contains(&oc.pet) && (122.0..=142.0).contains(&oc.avg_n_per_arm),
        &format!(
            "criterion 4: PO scenario 1 PET {:.1} in 68+/-10 and avg n {:.1} in 132+/-10",
            oc.pet, oc.avg_n_per_arm
        ),
    );
}

#[test]
fn c4_npo_scenario8_power() {
    let oc = run_oc(&npo_config(4003), 7);
    check(
        (61.0..=81.0).contains(&oc.prn),
        &format!("criterion 4: NPO scenario 8 PRN {:.1} in 71+/-10", oc.prn),
    );
}

#[test]
fn c4_switch_power_trend() {
    let sw_s8 = run_oc(&switch_config(4004), 7);
    let po_s8 = run_oc(&po_config(4005), 7);
    let sw_s5 = run_oc(&switch_config(4006), 4);
    let npo_s5 = run_oc(&npo_config(4007), 4);
    check(
        sw_s8.prn > po_s8.prn,
        &format!(
            "criterion 4: switch PRN beats the PO design on scenario 8 ({:.1} > {:.1})",
            sw_s8.prn, po_s8.prn
        ),
    );
    check(
        sw_s5.prn > npo_s5.prn,
        &format!(
            "criterion 4: switch PRN beats the NPO design on scenario 5 ({:.1} > {:.1})",
            sw_s5.prn, npo_s5.prn
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: monotonicity across effect sizes.
// ---------------------------------------------------------------------------

#[test]
fn c5_power_monotonicity() {
    let po: Vec<OperatingCharacteristics> = (0..5)
        .map(|i| run_oc(&po_config(5001 + i as u64), i))
        .collect();
    for w in po.windows(2) {
        check(
            w[1].prn >= w[0].prn + 3.0,
            &format!(
                "criterion 5: PO PRN step {:.1} -> {:.1} exceeds Monte Carlo noise",
                w[0].prn, w[1].prn
            ),
        );
        check(
            w[1].pet <= w[0].pet + 1.0,
            &format!(
                "criterion 5: PO PET decreases ({:.1} -> {:.1})",
                w[0].pet, w[1].pet
            ),
        );
    }
    let npo: Vec<OperatingCharacteristics> = (5..8)
        .map(|i| run_oc(&npo_config(5006 + i as u64), i))
        .collect();
    for w in npo.windows(2) {
        check(
            w[1].prn >= w[0].prn + 3.0,
            &format!(
                "criterion 5: NPO PRN step {:.1} -> {:.1} exceeds Monte Carlo noise",
                w[0].prn, w[1].prn
            ),
        );
        check(
            w[1].pet <= w[0].pet + 1.0,
            &format!(
                "criterion 5: NPO PET decreases ({:.1} -> {:.1})",
                w[0].pet, w[1].pet
            ),
        );
    }
}

// ---------------------------------------------------------------------------
// Criterion 6: model-selection discrimination.
// ---------------------------------------------------------------------------

fn selection_rates(effect: &EffectSpec, n: u64, priors: &PriorSpec, reps: usize, tag: u64) -> f64 {
    let control = control_p0();
    let treatment = apply_odds_ratios(&control, effect).unwrap();
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[tag, r as u64]));
            let data = TrialData::new(
                ArmData::new(control.sample_counts(n, &mut rng)).unwrap(),
                ArmData::new(treatment.sample_counts(n, &mut rng)).unwrap(),
            )
            .unwrap();
            let cfg = McmcConfig::default();
            let po = fit(&data, Model::Po, priors, &cfg, &mut rng).unwrap();
            let npo = fit(&data, Model::Npo, priors, &cfg, &mut rng).unwrap();
            let choice =
                select_model(&po, &npo, &data, priors, &RjConfig::default(), &mut rng).unwrap();
            usize::from(choice.selected == Model::Npo)
        })
        .sum();
    hits as f64 / reps as f64
}

/// As stated: at n = 200 the selector should pick PO on proportional data and
/// NPO on scenario-8 data in >60% of repetitions, with rates differing by >20
/// points. Scenario 8's per-boundary deviations are ~0.3 standard errors at
/// n = 200, so a consistent posterior-probability selector cannot reach 60%
/// there (its Bayes factor genuinely favors the smaller model); the published
/// behavior traces to the source's own admission that the supplemental-
/// variable prior was dropped from one side. Expected to fail as published;
/// the companion test below shows the selector discriminates once the signal
/// is detectable.
#[test]
fn c6_rjmcmc_discrimination_as_stated() {
    let priors = PriorSpec::defaults(6);
    let reps = 200;
    let npo_rate_on_po_data = selection_rates(
        &EffectSpec::proportional(1.4, 6).unwrap(),
        200,
        &priors,
        reps,
        6001,
    );
    let npo_rate_on_npo_data = selection_rates(
        &EffectSpec::new(vec![1.5, 1.5, 1.3, 1.3, 1.3]).unwrap(),
        200,
        &priors,
        reps,
        6002,
    );
    let po_ok = 1.0 - npo_rate_on_po_data > 0.6;
    let npo_ok = npo_rate_on_npo_data > 0.6;
    let gap_ok = (npo_rate_on_npo_data - npo_rate_on_po_data).abs() > 0.2;
    check(
        po_ok && npo_ok && gap_ok,
        &format!(
            "criterion 6: PO-data -> PO {:.0}% (>60), scenario-8 data -> NPO {:.0}% (>60), NPO-rate gap {:.0} points (>20)",
            100.0 * (1.0 - npo_rate_on_po_data),
            100.0 * npo_rate_on_npo_data,
            100.0 * (npo_rate_on_npo_data - npo_rate_on_po_data).abs()
        ),
    );
}

/// Companion property: with a detectable departure from proportionality
/// (large early-boundary shifts, n = 500, effect priors concentrated on
/// plausible log odds ratios) the selector prefers NPO on NPO data, prefers
/// PO on PO data, and separates the two by more than 20 points.
#[test]
fn c6_companion_selection_consistency() {
    let priors = PriorSpec::with_delta_var(6, 0.25);
    let reps = 100;
    let npo_rate_on_po_data = selection_rates(
        &EffectSpec::proportional(1.4, 6).unwrap(),
        500,
        &priors,
        reps,
        6101,
    );
    let npo_rate_on_npo_data = selection_rates(
        &EffectSpec::new(vec![2.5, 2.5, 1.6, 1.45, 1.45]).unwrap(),
        500,
        &priors,
        reps,
        6102,
    );
    check(
        npo_rate_on_npo_data > 0.6
            && npo_rate_on_po_data < 0.4
            && npo_rate_on_npo_data - npo_rate_on_po_data > 0.2,
        &format!(
            "criterion 6 (companion): detectable signal -> NPO {:.0}%, proportional data -> NPO {:.0}%",
            100.0 * npo_rate_on_npo_data,
            100.0 * npo_rate_on_po_data
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: soft targets for the packaged workflows.
// ---------------------------------------------------------------------------

/// As stated: the five-category sample-size example should land on 60, 80, or
/// 100 per group per stage with power near 0.82. Honest calibration of the
/// superiority cutoff at alpha = 0.05 requires c_s ~ 0.95 (the published
/// 0.9-with-type-I-0.04 is not attainable for a near-uniform null statistic,
/// where it yields ~0.09), which pushes the required size to ~140. Expected
/// to fail on the membership clause as published.
#[test]
fn c7_ss_po_sample_size_as_stated() {
    let control = CategoryDistribution::new(vec![0.3, 0.2, 0.15, 0.05, 0.3]).unwrap();
    let mut template = DesignConfig::new(Design::Po, 5, 20, 0.2, 0.95);
    template.method = Method::Frequentist;
    template.seed = 7001;
    template.utility = UtilityScale::new(vec![100.0, 75.0, 50.0, 25.0, 0.0]).unwrap();
    let effect = EffectSpec::proportional(1.5, 5).unwrap();
    let grid: Vec<u64> = (1..=10).map(|i| 20 * i).collect();
    let result = ordinal_gsd::calibration::find_sample_size(
        &template, &effect, &control, 0.05, 0.8, &grid, N_TRIALS,
    )
    .unwrap();
    let n_ok = [60, 80, 100].contains(&result.n_per_arm_per_stage);
    let power_ok = (result.achieved_power - 0.82).abs() <= 0.10;
    check(
        n_ok && power_ok,
        &format!(
            "criterion 7: sample-size search returned n = {} (published set {{60, 80, 100}}) with power {:.3} (0.82 +/- 0.10); cutoffs ({}, {})",
            result.n_per_arm_per_stage, result.achieved_power, result.c_f, result.c_s
        ),
    );
}

fn section4_npo_null_oc() -> OperatingCharacteristics {
    let mut cfg = DesignConfig::new(Design::Npo, 6, 100, 0.2, 0.95);
    cfg.method = Method::Frequentist;
    cfg.seed = 7002;
    let control = control_p0();
    let opts = ordinal_gsd::calibration::CalibrateOptions::new(0.05, N_TRIALS);
    let calib = ordinal_gsd::calibration::calibrate_thresholds(&cfg, &control, &opts).unwrap();
    cfg.c_f = calib.c_f;
    cfg.c_s = calib.c_s;
    run_oc(&cfg, 0)
}

#[test]
fn c7_oc_npo_type1_soft() {
    let oc = section4_npo_null_oc();
    let t1 = oc.prn / 100.0;
    check(
        t1 <= 0.10,
        &format!("criterion 7: null type I of the calibrated NPO run = {t1:.4} <= 0.10"),
    );
}

/// As stated: the published null run reports 91.3% early termination. The
/// interim statistic is near-uniform under the null, so the futility rule at
/// a calibrated c_f <= 0.3 cannot stop more than ~35% of null trials under
/// any shrinkage. Expected to fail as published.
#[test]
fn c7_oc_npo_pet_as_stated() {
    let oc = section4_npo_null_oc();
    check(
        oc.pet >= 80.0,
        &format!(
            "criterion 7: null PET of the calibrated NPO run = {:.1} >= 80",
            oc.pet
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: reproducibility of the command-line artifacts.
// ---------------------------------------------------------------------------

#[test]
fn c8_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_ordinal-gsd");
    let dir = std::env::temp_dir().join(format!("ogsd-c8-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("run.toml");
    std::fs::write(
        &config_path,
        r#"
control = [0.58, 0.05, 0.17, 0.03, 0.04, 0.13]
seed = 7
ntrial = 60
method = "Frequentist"
n = 60
c_f = 0.2
c_s = 0.95
or_list = [1.0, 1.4]
"#,
    )
    .unwrap();

    let run = |out: &str, threads: &str| {
        let status = Command::new(bin)
            .args([
                "oc-po",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                dir.join(out).to_str().unwrap(),
                "--threads",
                threads,
                "--overwrite",
            ])
            .output()
            .expect("binary runs");
        assert!(
            status.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&status.stderr)
        );
        let csv = std::fs::read(dir.join(out).join("results.csv")).unwrap();
        let json = std::fs::read(dir.join(out).join("result.json")).unwrap();
        (csv, json)
    };

    let (csv_a, json_a) = run("a", "2");
    let (csv_b, json_b) = run("b", "2");
    check(
        csv_a == csv_b && json_a == json_b,
        "criterion 8: same seed and thread count give byte-identical CSV and JSON",
    );
    let (csv_c, json_c) = run("c", "1");
    check(
        csv_a == csv_c && json_a == json_c,
        "criterion 8: different thread counts give identical aggregate outputs",
    );
    std::fs::remove_dir_all(&dir).ok();
}
