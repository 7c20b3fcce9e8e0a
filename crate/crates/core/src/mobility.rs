//! Random-waypoint motion, coverage episodes, and the arrival/stay statistics
//! the opportunity-cost estimators consume.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::histogram::{HistogramBuilder, HistogramDensity};
use crate::world::{GeoRegion, MobilityClass, RolloutParams, SimClock, UeId, UeState};

/// Upper bound on waypoint legs completed inside one step.
const MAX_LEGS_PER_STEP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityModel {
    pub region: GeoRegion,
    pub classes: Vec<MobilityClass>,
}

impl MobilityModel {
    pub fn new(region: GeoRegion, classes: Vec<MobilityClass>) -> Self {
        MobilityModel { region, classes }
    }

    /// Random-waypoint update over `dt` seconds, in place.
    ///
    /// The UE pauses, then travels toward its waypoint at constant speed. On
    /// reaching it a pause is drawn from the class range, followed by a fresh
    /// uniform waypoint and speed; leftover time in the step carries over, so
    /// one long step equals several short ones in distribution.
    pub fn advance<R: Rng + ?Sized>(&self, ue: &mut UeState, dt: f64, rng: &mut R) {
        let class = &self.classes[ue.class];
        if !class.is_static() {
            let bounds = &self.region.bounds;
            let mut remaining = dt;
            let mut legs = 0;
            while remaining > 0.0 {
                if ue.pause_remaining > 0.0 {
                    if ue.pause_remaining >= remaining {
                        ue.pause_remaining -= remaining;
                        break;
                    }
                    remaining -= ue.pause_remaining;
                    ue.pause_remaining = 0.0;
                }
                let dx = ue.waypoint.x - ue.position.x;
                let dy = ue.waypoint.y - ue.position.y;
                let dist = (dx * dx + dy * dy).sqrt();
                let reach = ue.speed * remaining;
                if reach < dist {
                    let f = reach / dist;
                    ue.position.x += dx * f;
                    ue.position.y += dy * f;
                    break;
                }
                ue.position = ue.waypoint;
                remaining -= if ue.speed > 0.0 { dist / ue.speed } else { 0.0 };
                ue.pause_remaining = class.draw_pause(rng);
                ue.waypoint = bounds.sample(rng);
                ue.speed = class.draw_speed(rng);
                legs += 1;
                if legs >= MAX_LEGS_PER_STEP {
                    break;
                }
            }
            ue.position = bounds.clamp(ue.position);
        }
        ue.in_coverage = self.region.covers(ue.position);
    }
}

/// Value form of [`MobilityModel::advance`].
pub fn step_ue<R: Rng + ?Sized>(model: &MobilityModel, ue: &UeState, dt: f64, rng: &mut R) -> UeState {
    let mut next = ue.clone();
    model.advance(&mut next, dt, rng);
    next
}

/// Contiguous run of in-coverage ticks `[arrival, departure)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageEpisode {
    pub ue: UeId,
    pub arrival: u64,
    pub departure: Option<u64>,
}

impl CoverageEpisode {
    pub fn is_closed(&self) -> bool {
        self.departure.is_some()
    }

    pub fn duration(&self, tick: f64) -> Option<f64> {
        self.departure.map(|d| (d - self.arrival) as f64 * tick)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageEvent {
    Arrived { ue: UeId, tick: u64 },
    Departed { ue: UeId, tick: u64 },
}

/// Coverage transition between two consecutive states of one UE; `tick` is
/// the index of `next`.
pub fn record_coverage_events(previous: &UeState, next: &UeState, tick: u64) -> Option<CoverageEvent> {
    debug_assert_eq!(previous.id, next.id);
    match (previous.in_coverage, next.in_coverage) {
        (false, true) => Some(CoverageEvent::Arrived { ue: next.id, tick }),
        (true, false) => Some(CoverageEvent::Departed { ue: next.id, tick }),
        _ => None,
    }
}

/// Open and recently closed coverage episodes of a population.
#[derive(Debug, Clone, Default)]
pub struct EpisodeLog {
    open: Vec<Option<u64>>,
    closed: VecDeque<CoverageEpisode>,
}

impl EpisodeLog {
    /// Opens an episode at `tick` for every UE already in coverage.
    pub fn new(ues: &[UeState], tick: u64) -> Self {
        let mut open = Vec::new();
        for ue in ues {
            let i = ue.id as usize;
            if open.len() <= i {
                open.resize(i + 1, None);
            }
            open[i] = ue.in_coverage.then_some(tick);
        }
        EpisodeLog {
            open,
            closed: VecDeque::new(),
        }
    }

    pub fn apply(&mut self, event: CoverageEvent) {
        match event {
            CoverageEvent::Arrived { ue, tick } => {
                let i = ue as usize;
                if self.open.len() <= i {
                    self.open.resize(i + 1, None);
                }
                self.open[i] = Some(tick);
            }
            CoverageEvent::Departed { ue, tick } => {
                if let Some(arrival) = self.open.get_mut(ue as usize).and_then(Option::take) {
                    self.closed.push_back(CoverageEpisode {
                        ue,
                        arrival,
                        departure: Some(tick),
                    });
                }
            }
        }
    }

    /// Drops closed episodes that ended at or before `tick`.
    pub fn prune(&mut self, tick: u64) {
        while self
            .closed
            .front()
            .is_some_and(|e| e.departure.is_some_and(|d| d <= tick))
        {
            self.closed.pop_front();
        }
    }

    pub fn closed(&self) -> impl Iterator<Item = &CoverageEpisode> {
        self.closed.iter()
    }

    pub fn open(&self) -> impl Iterator<Item = CoverageEpisode> + '_ {
        self.open.iter().enumerate().filter_map(|(i, a)| {
            a.map(|arrival| CoverageEpisode {
                ue: i as UeId,
                arrival,
                departure: None,
            })
        })
    }

    /// Closed episodes followed by open ones.
    pub fn snapshot(&self) -> Vec<CoverageEpisode> {
        self.closed.iter().copied().chain(self.open()).collect()
    }
}

/// Arrival and stay densities of one UE over the next period.
#[derive(Debug, Clone, PartialEq)]
pub struct UeDensities {
    pub arrival: HistogramDensity,
    pub stay: HistogramDensity,
}

/// Monte-Carlo rollouts of the UE's own mobility over `horizon` seconds.
///
/// The arrival density bins the first time the UE is seen in coverage (zero
/// when it already is); rollouts that never arrive go to its tail. The stay
/// density bins how long that first visit lasts, normalized over the rollouts
/// that arrived; visits still open at the horizon go to its tail.
pub fn rollout_densities<R: Rng + ?Sized>(
    model: &MobilityModel,
    ue: &UeState,
    horizon: f64,
    params: &RolloutParams,
    rng: &mut R,
) -> UeDensities {
    assert!(params.samples >= 1 && horizon > 0.0 && params.bins >= 1);
    let width = horizon / params.bins as f64;
    let mut arrival = HistogramBuilder::new(width, params.bins);
    let mut stay = HistogramBuilder::new(width, params.bins);
    let class = &model.classes[ue.class];
    let unreachable = model.region.distance_to_coverage(ue.position) > class.speed[1] * horizon;

    if class.is_static() || (!ue.in_coverage && unreachable) {
        // Static or out of reach: every rollout would repeat the same outcome.
        if ue.in_coverage {
            arrival.add(0.0, 1.0);
            stay.add_tail(1.0);
        } else {
            arrival.add_tail(1.0);
        }
    } else {
        let steps = (horizon / params.tick + 1e-9).floor() as u64;
        for _ in 0..params.samples {
            let mut state = ue.clone();
            let mut entered = state.in_coverage.then_some(0.0);
            let mut left = None;
            for s in 1..=steps {
                model.advance(&mut state, params.tick, rng);
                let t = s as f64 * params.tick;
                match entered {
                    None if state.in_coverage => {
                        if t >= horizon {
                            break;
                        }
                        entered = Some(t);
                    }
                    Some(_) if !state.in_coverage => {
                        left = Some(t);
                        break;
                    }
                    _ => {}
                }
            }
            match (entered, left) {
                (None, _) => arrival.add_tail(1.0),
                (Some(a), Some(d)) => {
                    arrival.add(a, 1.0);
                    stay.add(d - a, 1.0);
                }
                (Some(a), None) => {
                    arrival.add(a, 1.0);
                    stay.add_tail(1.0);
                }
            }
        }
    }
    let stay = if stay.total_weight() > 0.0 {
        stay.normalized()
    } else {
        HistogramDensity::tail_only(width, params.bins)
    };
    UeDensities {
        arrival: arrival.normalized(),
        stay,
    }
}

/// Aggregate mobility context for the edge-driven estimator, plus the per-UE
/// densities gathered for the UE-driven one.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityStats {
    /// Mean number of distinct UEs served per period over the window.
    pub mean_served: f64,
    /// Density of closed visit durations in the window.
    pub stay: HistogramDensity,
    /// No closed visits in the window; the stay density is empty.
    pub empty_history: bool,
    pub per_ue: BTreeMap<UeId, UeDensities>,
}

/// Statistics over the `window` periods preceding the clock's current period.
///
/// The served count per period is the number of distinct UEs with at least
/// one in-coverage tick in it; the stay density bins the durations of
/// episodes that closed inside the window on a `period / bins` grid spanning
/// the whole window.
pub fn aggregate_stats(episodes: &[CoverageEpisode], window: u64, clock: &SimClock, bins: usize) -> MobilityStats {
    assert!(window >= 1, "window must cover at least one period");
    let current = clock.current_period();
    let first = current.saturating_sub(window);
    let periods = current - first;
    let width = clock.period / bins as f64;
    let start = clock.period_start_tick(first);
    let end = clock.period_start_tick(current);
    let k = clock.ticks_per_period;

    let mut seen: Vec<(u64, UeId)> = Vec::new();
    let mut stays = HistogramBuilder::new(width, bins * window as usize);
    for e in episodes {
        let departure = e.departure.unwrap_or(u64::MAX).min(end);
        if e.arrival >= end || departure <= start || departure <= e.arrival {
            continue;
        }
        let lo = e.arrival.max(start) / k;
        let hi = (departure - 1) / k;
        seen.extend((lo..=hi).map(|p| (p, e.ue)));
        if let Some(d) = e.departure {
            if d > start && d <= end {
                stays.add((d - e.arrival) as f64 * clock.tick, 1.0);
            }
        }
    }
    seen.sort_unstable();
    seen.dedup();
    let mean_served = if periods == 0 {
        0.0
    } else {
        seen.len() as f64 / periods as f64
    };
    let stay = stays.normalized();
    MobilityStats {
        mean_served,
        empty_history: stay.is_empty(),
        stay,
        per_ue: BTreeMap::new(),
    }
}
