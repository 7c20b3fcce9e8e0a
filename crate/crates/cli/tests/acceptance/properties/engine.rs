use island_core::engine::{day_totals, run_scenario, NullSink, ScenarioReport};
use island_core::estimator::SyncAction;
use island_core::world::{PolicyKind, ScenarioConfig, StayTruncation};
use proptest::prelude::*;
use serde_json::Value;

use super::{check, Property};
use crate::common::{rng, small_config};
use crate::optimality;

pub fn properties() -> Vec<Property> {
    vec![
        ("policies see the same realized outages", common_random_numbers),
        ("always loses nothing, never pays nothing", baselines),
        ("island charges exactly one baseline's cost", selector),
        ("totals recompute bit-exactly from the audit trail", audit_closure),
        ("decisions match brute-force enumeration", oracle_agreement),
    ]
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    let duty = prop_oneof![Just(1.0), Just(0.0), 0.0..=1.0f64];
    let vnf = (duty, 0.0..200.0f64, 0.0..2e-2f64, 1e-3..2e-2f64, 0.1..5.0f64);
    let trunc = prop_oneof![Just(StayTruncation::Exclude), Just(StayTruncation::Censor)];
    (any::<u64>(), vnf.clone(), vnf, trunc, 0..2u64, 1..3u64).prop_map(|(seed, a, b, trunc, warmup, days)| {
        let mut cfg = small_config(seed);
        for (v, (duty, c_m, fail, repair, l)) in cfg.vnfs.iter_mut().zip([a, b]) {
            v.duty = duty;
            v.migration_cost = c_m;
            v.failure_rate = fail;
            v.repair_rate = repair;
            v.loss_rate = l;
        }
        cfg.stay_truncation = trunc;
        cfg.warmup_periods = warmup;
        cfg.days = days;
        cfg
    })
}

fn simulate(cfg: ScenarioConfig) -> ScenarioReport {
    run_scenario(cfg, &mut NullSink).expect("generated scenario runs")
}

fn by_period(report: &ScenarioReport) -> impl Iterator<Item = &[island_core::engine::PeriodReport]> {
    report.periods.chunks(report.config.policies.len())
}

fn common_random_numbers() -> Result<String, String> {
    check(scenario(), |cfg| {
        let report = simulate(cfg);
        for group in by_period(&report) {
            let first = &group[0];
            for other in &group[1..] {
                prop_assert_eq!(first.period, other.period);
                prop_assert_eq!(first.ue_count, other.ue_count);
                for (a, b) in first.vnfs.iter().zip(&other.vnfs) {
                    prop_assert_eq!(a.outage_seconds, b.outage_seconds);
                    prop_assert_eq!(a.exposed_ue_ticks, b.exposed_ue_ticks);
                }
            }
        }
        Ok(())
    })
}

fn baselines() -> Result<String, String> {
    check(scenario(), |cfg| {
        let report = simulate(cfg);
        for p in &report.periods {
            for v in &p.vnfs {
                match p.policy {
                    PolicyKind::Always => prop_assert_eq!(v.outage_loss, 0.0),
                    PolicyKind::Never => prop_assert_eq!(v.migration_charged, 0.0),
                    PolicyKind::Island => {}
                }
            }
        }
        Ok(())
    })
}

fn selector() -> Result<String, String> {
    check(scenario(), |cfg| {
        let report = simulate(cfg);
        for group in by_period(&report) {
            let find = |k: PolicyKind| group.iter().find(|p| p.policy == k).unwrap();
            let (never, always, island) = (
                find(PolicyKind::Never),
                find(PolicyKind::Always),
                find(PolicyKind::Island),
            );
            for (v, i) in island.vnfs.iter().enumerate() {
                let base = match i.action {
                    SyncAction::Skip => &never.vnfs[v],
                    SyncAction::Synchronize => &always.vnfs[v],
                };
                prop_assert_eq!(i.migration_charged.to_bits(), base.migration_charged.to_bits());
                prop_assert_eq!(i.outage_loss.to_bits(), base.outage_loss.to_bits());
            }
        }
        Ok(())
    })
}

fn audit_closure() -> Result<String, String> {
    check(scenario(), |cfg| {
        let report = simulate(cfg);
        let audit: Vec<Value> = report
            .periods
            .iter()
            .map(|p| serde_json::from_str(&serde_json::to_string(p).unwrap()).unwrap())
            .collect();
        let per_day = report.config.periods_per_day as usize * report.config.policies.len();
        for (day, chunk) in audit.chunks(per_day).enumerate() {
            let expected = day_totals(
                day as u64,
                &report.periods[day * per_day..(day + 1) * per_day],
                &report.config.policies,
            );
            for d in expected {
                let (mut migration, mut loss) = (0.0, 0.0);
                for p in chunk.iter().filter(|p| p["policy"] == d.policy.as_str()) {
                    let v = p["vnfs"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .find(|v| v["vnf"] == d.vnf.as_str())
                        .unwrap();
                    migration += v["migration_charged"].as_f64().unwrap();
                    loss += v["outage_loss"].as_f64().unwrap();
                }
                prop_assert_eq!(migration.to_bits(), d.migration_cost.to_bits());
                prop_assert_eq!(loss.to_bits(), d.outage_loss.to_bits());
                prop_assert_eq!((migration + loss).to_bits(), d.total_cost.to_bits());
            }
        }
        Ok(())
    })
}

fn oracle_agreement() -> Result<String, String> {
    check(any::<u64>(), |seed| {
        let instance = optimality::tiny_instance(&mut rng(seed));
        prop_assert!(
            optimality::agrees(&instance).is_ok(),
            "{:?}",
            optimality::agrees(&instance)
        );
        Ok(())
    })
}
