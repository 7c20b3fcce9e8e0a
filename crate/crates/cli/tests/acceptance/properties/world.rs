use island_core::engine::{NullSink, Policy, World};
use island_core::mobility::step_ue;
use island_core::mobility::MobilityModel;
use island_core::world::{population_size, spawn_seeded, PolicyKind};
use proptest::prelude::*;

use super::{check, Property, CASES};
use crate::common::{bundled_reference, rng, small_config};

pub fn properties() -> Vec<Property> {
    vec![
        ("identical config and seed give identical runs", determinism),
        ("UEs stay in bounds and coverage matches the disc", bounds),
        ("mean in-coverage count matches density x area", coverage_mean),
    ]
}

fn determinism() -> Result<String, String> {
    check((any::<u64>(), 20.0..300.0f64), |(seed, density)| {
        let mut cfg = small_config(seed);
        cfg.density = density;
        prop_assert_eq!(spawn_seeded(&cfg), spawn_seeded(&cfg));
        let policies: Vec<Policy> = PolicyKind::ALL.iter().map(|&k| Policy::from_kind(k, &cfg)).collect();
        let mut a = World::new(cfg.clone()).unwrap();
        let mut b = World::new(cfg).unwrap();
        for _ in 0..2 {
            let (ra, rb) = (
                a.run_period(&policies, &mut NullSink).unwrap(),
                b.run_period(&policies, &mut NullSink).unwrap(),
            );
            prop_assert_eq!(ra, rb);
            prop_assert_eq!(a.ues(), b.ues());
        }
        Ok(())
    })
}

fn bounds() -> Result<String, String> {
    let dts = prop::sample::select(vec![0.5, 1.0, 5.0, 30.0, 120.0]);
    check((any::<u64>(), dts, 1..400usize), |(seed, dt, steps)| {
        let cfg = small_config(seed);
        let model = MobilityModel::new(cfg.region, cfg.classes.clone());
        let mut ues = spawn_seeded(&cfg);
        let mut r = rng(seed);
        for ue in &ues {
            prop_assert!(cfg.region.bounds.contains(ue.position) && cfg.region.bounds.contains(ue.waypoint));
            prop_assert_eq!(ue.in_coverage, cfg.region.covers(ue.position));
        }
        for _ in 0..steps {
            for ue in &mut ues {
                *ue = step_ue(&model, ue, dt, &mut r);
                prop_assert!(cfg.region.bounds.contains(ue.position), "{:?}", ue);
                prop_assert!(cfg.region.bounds.contains(ue.waypoint), "{:?}", ue);
                prop_assert_eq!(ue.in_coverage, cfg.region.covers(ue.position));
            }
        }
        Ok(())
    })
}

/// Spawn-time in-disc count averaged over seeds; UEs are placed uniformly, so
/// the disc holds `density × area` of them in expectation.
fn coverage_mean() -> Result<String, String> {
    let cfg = bundled_reference();
    let expected = cfg.density * cfg.region.coverage_area_km2();
    let mut total = 0usize;
    for seed in 0..CASES as u64 {
        let mut c = cfg.clone();
        c.seed = seed;
        total += spawn_seeded(&c).iter().filter(|u| u.in_coverage).count();
    }
    let mean = total as f64 / CASES as f64;
    let rel = (mean / expected - 1.0).abs();
    let detail = format!(
        "{CASES} seeds of {} UEs: mean {mean:.1} vs {expected:.1}, off by {:.2}%",
        population_size(&cfg),
        rel * 100.0
    );
    if rel <= 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}
