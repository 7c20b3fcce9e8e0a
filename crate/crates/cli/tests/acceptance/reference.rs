//! The reference scenario over 30 days and 10 seeds, plus the check that the
//! coarser 5 s tick used for it agrees with 1 s ticks.

use std::time::Instant;

use island_core::engine::{run_scenario, NullSink, ScenarioReport};
use island_core::world::{PolicyKind, ScenarioConfig};

use crate::common::{bundled_reference, mean_se};

const SEEDS: u64 = 10;
const DAYS: u64 = 30;
const COARSE_TICK: f64 = 5.0;
const EQUIV_SEEDS: u64 = 4;
const EQUIV_DAYS: u64 = 2;
const SEED_DAY_BUDGET_S: f64 = 60.0;

fn simulate(mut cfg: ScenarioConfig, seed: u64, tick: f64, days: u64) -> (ScenarioReport, f64) {
    cfg.seed = seed;
    cfg.tick = tick;
    cfg.days = days;
    let start = Instant::now();
    let report = run_scenario(cfg, &mut NullSink).expect("reference scenario runs");
    (report, start.elapsed().as_secs_f64())
}

fn daily(report: &ScenarioReport, policy: PolicyKind, vnf: &str) -> Vec<f64> {
    report
        .days
        .iter()
        .filter(|d| d.policy == policy && d.vnf == vnf)
        .map(|d| d.total_cost)
        .collect()
}

/// Island vs the better baseline per VNF on paired per-seed means.
fn island_vs_baselines(cfg: &ScenarioConfig, lines: &mut Vec<String>) -> bool {
    let reports: Vec<ScenarioReport> = (1..=SEEDS)
        .map(|seed| {
            let (r, secs) = simulate(cfg.clone(), seed, COARSE_TICK, DAYS);
            eprintln!(
                "  reference seed {seed}: {secs:.0} s, mean in coverage {:.0}",
                r.mean_in_coverage
            );
            r
        })
        .collect();
    let mut ok = true;
    for vnf in cfg.vnfs.iter().map(|v| v.id.as_str()) {
        let per_seed = |p: PolicyKind| -> Vec<f64> { reports.iter().map(|r| r.mean_daily_cost(p, vnf)).collect() };
        let (never, always, island) = (
            per_seed(PolicyKind::Never),
            per_seed(PolicyKind::Always),
            per_seed(PolicyKind::Island),
        );
        let (mn, ma, mi) = (mean_se(&never).0, mean_se(&always).0, mean_se(&island).0);
        let (best_name, best) = if mn <= ma {
            ("never", &never)
        } else {
            ("always", &always)
        };
        let diff: Vec<f64> = island.iter().zip(best).map(|(i, b)| i - b).collect();
        let (d, se) = mean_se(&diff);
        let pass = d <= se;
        ok &= pass;
        lines.push(format!(
            "{vnf}: island {mi:.0}, never {mn:.0}, always {ma:.0} per day; island - {best_name} = {d:.0} (se {se:.0}) {}",
            if pass { "ok" } else { "exceeds 1 se" }
        ));
    }
    ok
}

/// Every daily cost series and the in-coverage count at 1 s and 5 s ticks must
/// agree within three combined standard errors.
fn tick_equivalence(cfg: &ScenarioConfig, lines: &mut Vec<String>) -> bool {
    let mut fine = Vec::new();
    let mut coarse = Vec::new();
    let mut fine_secs = 0.0;
    for seed in 1..=EQUIV_SEEDS {
        let (r, secs) = simulate(cfg.clone(), 100 + seed, 1.0, EQUIV_DAYS);
        fine_secs += secs;
        fine.push(r);
        coarse.push(simulate(cfg.clone(), 100 + seed, COARSE_TICK, EQUIV_DAYS).0);
    }
    let per_seed_day = fine_secs / (EQUIV_SEEDS * EQUIV_DAYS) as f64;
    let mut ok = per_seed_day < SEED_DAY_BUDGET_S;
    let mut worst: f64 = 0.0;
    let mut compare = |name: String, a: Vec<f64>, b: Vec<f64>| {
        let ((ma, sa), (mb, sb)) = (mean_se(&a), mean_se(&b));
        let band = 3.0 * sa.hypot(sb);
        let within = (ma - mb).abs() <= band;
        if band > 0.0 {
            worst = worst.max((ma - mb).abs() / band * 3.0);
        }
        if !within {
            ok = false;
            lines.push(format!(
                "tick equivalence: {name} {ma:.1} at 1 s vs {mb:.1} at 5 s (band {band:.1})"
            ));
        }
    };
    compare(
        "mean in coverage".into(),
        fine.iter().map(|r| r.mean_in_coverage).collect(),
        coarse.iter().map(|r| r.mean_in_coverage).collect(),
    );
    for vnf in cfg.vnfs.iter().map(|v| v.id.as_str()) {
        for &p in PolicyKind::ALL.iter() {
            compare(
                format!("{vnf} {p}"),
                fine.iter().flat_map(|r| daily(r, p, vnf)).collect(),
                coarse.iter().flat_map(|r| daily(r, p, vnf)).collect(),
            );
        }
    }
    lines.push(format!(
        "tick equivalence 1 s vs 5 s over {EQUIV_SEEDS} seeds x {EQUIV_DAYS} days: worst gap {worst:.2} se; {per_seed_day:.1} s per seed-day at 1 s"
    ));
    ok
}

pub fn run() -> Result<String, String> {
    let cfg = bundled_reference();
    let mut lines = Vec::new();
    let equivalent = tick_equivalence(&cfg, &mut lines);
    let better = island_vs_baselines(&cfg, &mut lines);
    let detail = format!(
        "{SEEDS} seeds x {DAYS} days at {COARSE_TICK} s ticks; {}",
        lines.join("; ")
    );
    if equivalent && better {
        Ok(detail)
    } else {
        Err(detail)
    }
}
