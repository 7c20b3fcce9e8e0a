use island_core::histogram::MASS_TOLERANCE;
use island_core::mobility::{
    aggregate_stats, record_coverage_events, rollout_densities, step_ue, CoverageEpisode, EpisodeLog, MobilityModel,
};
use island_core::world::{Point, RolloutParams, SimClock, UeState};
use proptest::prelude::*;
use rand::Rng;

use super::{check, Property};
use crate::common::{rng, small_config};

pub fn properties() -> Vec<Property> {
    vec![
        ("every produced density has unit mass", unit_mass),
        ("rollout densities converge at root-n", convergence),
        ("episode durations reconstruct in-coverage time", reconstruction),
    ]
}

fn ue_strategy() -> impl Strategy<Value = UeState> {
    (
        -500.0..500.0f64,
        -500.0..500.0f64,
        -500.0..500.0f64,
        -500.0..500.0f64,
        0..3usize,
        0.0..200.0f64,
    )
        .prop_map(|(x, y, wx, wy, class, pause)| {
            let cfg = small_config(0);
            let position = Point::new(x, y);
            UeState {
                id: 0,
                position,
                waypoint: Point::new(wx, wy),
                speed: cfg.classes[class].speed[1],
                pause_remaining: pause,
                class,
                in_coverage: cfg.region.covers(position),
            }
        })
}

fn unit_mass() -> Result<String, String> {
    check(
        (
            ue_strategy(),
            any::<u64>(),
            1..40usize,
            1..80usize,
            60.0..1800.0f64,
            1.0..30.0f64,
        ),
        |(ue, seed, samples, bins, horizon, tick)| {
            let cfg = small_config(0);
            let model = MobilityModel::new(cfg.region, cfg.classes.clone());
            let params = RolloutParams { samples, tick, bins };
            let d = rollout_densities(&model, &ue, horizon, &params, &mut rng(seed));
            for h in [&d.arrival, &d.stay] {
                prop_assert!(h.validate().is_ok());
                prop_assert!(
                    (h.total_mass() - 1.0).abs() <= MASS_TOLERANCE,
                    "mass {}",
                    h.total_mass()
                );
            }

            // aggregate statistics over a random episode log
            let clock = SimClock {
                current_tick: 48 * 60,
                ..SimClock::new(1.0, 60.0).unwrap()
            };
            let mut r = rng(seed ^ 1);
            let episodes: Vec<CoverageEpisode> = (0..samples as u32)
                .map(|ue| {
                    let arrival = r.random_range(0..48 * 60u64);
                    let departure = (r.random_bool(0.7)).then(|| arrival + r.random_range(1..600u64));
                    CoverageEpisode { ue, arrival, departure }
                })
                .collect();
            let stats = aggregate_stats(&episodes, 1 + seed % 24, &clock, bins);
            prop_assert!(stats.stay.validate().is_ok());
            if !stats.empty_history {
                prop_assert!((stats.stay.total_mass() - 1.0).abs() <= MASS_TOLERANCE);
            }
            Ok(())
        },
    )
}

/// Quadrupling the rollout count should halve the mean L1 distance between
/// two independent estimates.
fn convergence() -> Result<String, String> {
    let cfg = island_core::world::reference_config();
    let model = MobilityModel::new(cfg.region, cfg.classes.clone());
    let ue = UeState {
        id: 9,
        position: Point::new(2300.0, 0.0),
        waypoint: Point::new(2300.0, 0.0),
        speed: 10.0,
        pause_remaining: 0.0,
        class: 1,
        in_coverage: false,
    };
    let l1 = |samples: usize, rep: u64| {
        let params = RolloutParams {
            samples,
            tick: 30.0,
            bins: 60,
        };
        let a = rollout_densities(&model, &ue, 3600.0, &params, &mut rng(2 * rep));
        let b = rollout_densities(&model, &ue, 3600.0, &params, &mut rng(2 * rep + 1));
        a.arrival.l1_distance(&b.arrival) + a.stay.l1_distance(&b.stay)
    };
    let reps = 20;
    let small = (0..reps).map(|r| l1(1000, r)).sum::<f64>() / reps as f64;
    let large = (0..reps).map(|r| l1(4000, 100 + r)).sum::<f64>() / reps as f64;
    let ratio = small / large;
    let detail = format!("mean L1 {small:.4} at 1000 samples, {large:.4} at 4000, ratio {ratio:.2}");
    if (1.7..=2.3).contains(&ratio) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reconstruction() -> Result<String, String> {
    let dts = prop::sample::select(vec![0.5, 1.0, 5.0, 10.0]);
    check(
        (ue_strategy(), any::<u64>(), dts, 1..3000u64),
        |(ue, seed, dt, ticks)| {
            let cfg = small_config(0);
            let model = MobilityModel::new(cfg.region, cfg.classes.clone());
            let mut r = rng(seed);
            let mut log = EpisodeLog::new(std::slice::from_ref(&ue), 0);
            let mut state = ue;
            let mut covered = 0u64;
            for k in 0..ticks {
                covered += state.in_coverage as u64;
                let next = step_ue(&model, &state, dt, &mut r);
                if let Some(event) = record_coverage_events(&state, &next, k + 1) {
                    log.apply(event);
                }
                state = next;
            }
            let total: u64 = log
                .snapshot()
                .iter()
                .map(|e| e.departure.unwrap_or(ticks) - e.arrival)
                .sum();
            prop_assert_eq!(total, covered);
            let seconds: f64 = log.closed().filter_map(|e| e.duration(dt)).sum::<f64>()
                + log.open().map(|e| (ticks - e.arrival) as f64 * dt).sum::<f64>();
            prop_assert_eq!(seconds, covered as f64 * dt);
            Ok(())
        },
    )
}
