//! Acceptance run: one PASS/FAIL line per criterion with the measured
//! quantity and runtime. Every criterion runs even when an earlier one
//! fails; the process exits nonzero if any failed.
//!
//! The random sensor study dominates the runtime (about fifteen minutes on one
//! core); everything else finishes in about a minute.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use sensact::experiment::{
    run, AsenSweepParams, AuditParams, Experiment, ExperimentConfig, ProblemKind, PropGapParams,
    RunReport,
};
use sensact::instances::{example1_pomdp, example2_mdp, example3_instance, example4_instance, r_approx, GapParams};
use sensact::pomdp::solve_infinite_horizon;
use sensact::selection::evaluate_actuator_set;

/// Seeds per point of the cascade sweeps.
const ASEN_SEEDS: usize = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion(id: usize, name: &str, limit: Duration, body: impl FnOnce() -> Result<Outcome, String>) -> bool {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let (pass, detail) = match result {
        Ok(o) => (o.pass && in_time, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let line = format!(
        "criterion {id:>2} {:<4} {name}: {detail} [{:.2} s, limit {} s{}]\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", over time" },
    );
    // straight to stderr so the lines show without --nocapture
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    pass
}

fn err(e: sensact::Error) -> String {
    e.to_string()
}

fn run_config(mut cfg: ExperimentConfig, seed: u64) -> Result<RunReport, String> {
    cfg.seed = seed;
    run(&cfg).map_err(err)
}

fn gap_criterion(kind: ProblemKind, tol: f64) -> Result<Outcome, String> {
    let params = PropGapParams {
        h: vec![2.0, 5.0, 10.0, 100.0],
        problems: vec![kind],
        ..PropGapParams::default()
    };
    let report = run_config(ExperimentConfig::new(Experiment::PropGap(params.clone())), 1)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (row, &h) in report.rows_for("greedy").zip(&params.h) {
        let gap = GapParams::new(params.r2, params.r3, h * params.r2, params.c, params.gamma);
        let predicted = gap.predicted_ratio();
        let ratio = row.ratio.ok_or_else(|| format!("{}: {}", row.instance, row.status))?;
        pass &= row.selected == [0, 1] && (ratio - predicted).abs() <= tol;
        parts.push(format!("R4={h}: {ratio:.6} (formula {predicted:.6}, picks {:?})", row.selected));
        if h == 100.0 {
            pass &= ratio < 0.02;
        }
    }
    pass &= parts.len() == 4;
    // instances must also be constructible with the stated parameters
    let gap = GapParams::new(1.0, 0.5, 100.0, 0.01, 0.9);
    match kind {
        ProblemKind::Sensor => example3_instance(&gap).map(drop).map_err(err)?,
        ProblemKind::Actuator => example4_instance(&gap).map(drop).map_err(err)?,
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn study(report: &RunReport, floor: f64, slack: f64) -> Outcome {
    let rows: Vec<_> = report.rows_for("greedy").collect();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let failed = rows.iter().filter(|r| r.status != "ok" || r.ratio.is_none()).count();
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let in_range = ratios.iter().all(|&r| r >= -slack && r <= 1.0 + slack);
    outcome(
        failed == 0 && !ratios.is_empty() && mean >= floor && in_range,
        format!(
            "{} instances, mean greedy/optimal {mean:.4} (need >= {floor}), range [{min:.4}, {max:.4}], {failed} failed rows",
            ratios.len()
        ),
    )
}

fn properties() -> Result<Outcome, String> {
    let mut violations = Vec::new();
    let mut checks = 0usize;
    let mut record = |name: &str, r: common::Check| {
        checks += 1;
        if let Err(e) = r {
            violations.push(format!("{name}: {e}"));
        }
    };
    for seed in 0..16u64 {
        record("row stochasticity", common::rows_are_stochastic(seed));
        record("flatten equivalence", common::random_flatten_agrees(seed));
        record("belief simplex", common::beliefs_stay_on_simplex(seed, 2 + seed as usize % 4, 1 + seed as usize % 3));
        record("prune soundness", common::pruning_is_sound(seed, 2 + seed as usize % 4, 1 + (seed as usize * 7) % 40));
        for stages in 1..=3 {
            record("expectimax equality", common::matches_expectimax(seed, 2 + seed as usize % 2, stages));
        }
        record("cascade monotonicity", common::cascade_is_monotone(seed, seed as usize));
    }
    let gap = GapParams::new(1.0, 0.5, 5.0, 0.01, 0.9);
    record("flatten equivalence", common::flatten_agrees(&example3_instance(&gap).map_err(err)?.mdp));
    record("flatten equivalence", common::flatten_agrees(&example4_instance(&gap).map_err(err)?.mdp));
    let detail = match violations.first() {
        None => format!("{checks} checks, 0 violations"),
        Some(first) => format!("{checks} checks, {} violations; first: {first}", violations.len()),
    };
    Ok(outcome(violations.is_empty(), detail))
}

fn main() {
    let secs = Duration::from_secs;
    let mut passed = Vec::new();

    passed.push(criterion(1, "noiseless sensor on the single gadget", secs(10), || {
        let with = solve_infinite_horizon(&example1_pomdp(1.0, 0.1, 0.9, true).map_err(err)?, 1e-6).map_err(err)?;
        let without = solve_infinite_horizon(&example1_pomdp(1.0, 0.1, 0.9, false).map_err(err)?, 1e-6).map_err(err)?;
        let (a, b) = (with.value_at_b0, without.value_at_b0);
        Ok(outcome(
            (a - 10.0).abs() <= 1e-4 && b.abs() <= 1e-4,
            format!("with sensor {a:.8} (want 10 ± 1e-4), without {b:.8} (want 0 ± 1e-4)"),
        ))
    }));

    passed.push(criterion(2, "actuator on the single gadget", secs(1), || {
        let p = example2_mdp(1.0, 0.1, 0.9).map_err(err)?;
        let with = evaluate_actuator_set(&p.mdp, &p.catalog, &[0]).map_err(err)?;
        let without = evaluate_actuator_set(&p.mdp, &p.catalog, &[]).map_err(err)?;
        Ok(outcome(
            (with - 10.0).abs() <= 1e-9 && without.abs() <= 1e-9,
            format!("with actuator {with:.12} (want 10 ± 1e-9), without {without:.12}"),
        ))
    }));

    passed.push(criterion(3, "sensor greedy gap", secs(120), || gap_criterion(ProblemKind::Sensor, 1e-4)));
    passed.push(criterion(4, "actuator greedy gap", secs(10), || gap_criterion(ProblemKind::Actuator, 1e-6)));

    passed.push(criterion(5, "set-cover reduction audit", secs(600), || {
        let report = run_config(ExperimentConfig::new(Experiment::ReductionAudit(AuditParams::default())), 1)?;
        let checked = report.rows.iter().filter(|r| r.check.is_some()).count();
        let failed = report.rows.iter().filter(|r| r.check != Some(true)).count();
        Ok(outcome(
            failed == 0 && checked > 0,
            format!("{} rows (n, m <= 3, k <= 2, c = 2), {failed} failing", report.rows.len()),
        ))
    }));

    passed.push(criterion(6, "approximation bound", secs(1), || {
        let exact = r_approx(2, 3, 0.9, 2.0).map_err(err)?;
        let grid = (0..10).map(|i| r_approx(2, 3, 0.9, 1.5 + 0.5 * i as f64)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let monotone = grid.windows(2).all(|w| w[1] < w[0]);
        Ok(outcome(
            exact == 0.296875 && monotone,
            format!("r_approx(2,3,0.9,2) = {exact}, strictly decreasing over c in 1.5..=6: {monotone}"),
        ))
    }));

    passed.push(criterion(7, "random sensor-selection study", secs(1800), || {
        let report = run_config(ExperimentConfig::preset("random-ss").map_err(err)?, 1)?;
        Ok(study(&report, 0.70, 1e-3))
    }));

    passed.push(criterion(8, "random actuator-selection study", secs(600), || {
        let report = run_config(ExperimentConfig::preset("random-as").map_err(err)?, 1)?;
        Ok(study(&report, 0.70, 1e-9))
    }));

    passed.push(criterion(9, "cascade islanding sweeps", secs(1800), || {
        let mut cfg = ExperimentConfig::new(Experiment::AsenSweep(AsenSweepParams::default()));
        cfg.instances = ASEN_SEEDS;
        let report = run_config(cfg, 1)?;
        let s = study(&report, 0.70, 1e-9);
        let (wins, total) = report.paired_wins("greedy", "random");
        let share = wins as f64 / total.max(1) as f64;
        Ok(outcome(
            s.pass && total > 0 && share >= 0.9,
            format!("{}; greedy >= random on {wins}/{total} paired instances ({:.1}%)", s.detail, 100.0 * share),
        ))
    }));

    passed.push(criterion(10, "property suites", secs(300), properties));

    let failed = passed.iter().filter(|p| !**p).count();
    eprintln!("acceptance: {} of {} criteria passed", passed.len() - failed, passed.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
