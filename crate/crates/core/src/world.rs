//! Scenario domain types: geometry, mobility classes, UEs, VNFs, the clock and
//! the validated scenario configuration.

use std::collections::BTreeSet;
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Domain};

/// Tolerance on the sum of class population shares.
pub const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn centered_square(center: Point, side: f64) -> Self {
        let h = 0.5 * side;
        Rect {
            min: Point::new(center.x - h, center.y - h),
            max: Point::new(center.x + h, center.y + h),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            self.min.x + rng.random::<f64>() * self.width(),
            self.min.y + rng.random::<f64>() * self.height(),
        )
    }
}

/// Edge-cloud coverage disc inside the simulated world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoRegion {
    pub center: Point,
    pub radius: f64,
    pub bounds: Rect,
}

impl GeoRegion {
    pub fn covers(&self, p: Point) -> bool {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    /// Coverage area in km².
    pub fn coverage_area_km2(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * 1e-6
    }

    /// Distance from `p` to the nearest covered point.
    pub fn distance_to_coverage(&self, p: Point) -> f64 {
        (p.distance(self.center) - self.radius).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityClass {
    pub name: String,
    /// `[v_min, v_max]`, m/s.
    pub speed: [f64; 2],
    /// `[p_min, p_max]`, seconds.
    pub pause: [f64; 2],
    pub share: f64,
}

impl MobilityClass {
    pub fn is_static(&self) -> bool {
        self.speed[1] <= 0.0
    }

    pub fn draw_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let [lo, hi] = self.speed;
        lo + rng.random::<f64>() * (hi - lo)
    }

    pub fn draw_pause<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let [lo, hi] = self.pause;
        lo + rng.random::<f64>() * (hi - lo)
    }
}

pub type UeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub id: UeId,
    pub position: Point,
    pub waypoint: Point,
    pub speed: f64,
    pub pause_remaining: f64,
    /// Index into the scenario's mobility classes.
    pub class: usize,
    pub in_coverage: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Per-UE arrival/stay densities (stateful VNFs).
    UeDriven,
    /// Aggregate served count and stay density (stateless VNFs).
    EdgeDriven,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::UeDriven => "ue-driven",
            EstimatorKind::EdgeDriven => "edge-driven",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnfSpec {
    pub id: String,
    /// Cost of synchronizing and keeping the edge redundancy for one period.
    pub migration_cost: f64,
    /// Duty rate η, also the default per-UE duty.
    pub duty: f64,
    /// Outage loss per served UE per second.
    pub loss_rate: f64,
    pub estimator: EstimatorKind,
    /// Up to down, 1/s.
    pub failure_rate: f64,
    /// Down to up, 1/s.
    pub repair_rate: f64,
}

/// Tick and period lengths; one period is a whole number of ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimClock {
    pub tick: f64,
    pub period: f64,
    pub ticks_per_period: u64,
    pub current_tick: u64,
}

impl SimClock {
    pub fn new(tick: f64, period: f64) -> Option<Self> {
        let ratio = period / tick;
        let n = ratio.round();
        let exact = tick > 0.0 && period > 0.0 && n >= 1.0 && (ratio - n).abs() <= 1e-9 * n;
        exact.then_some(SimClock {
            tick,
            period,
            ticks_per_period: n as u64,
            current_tick: 0,
        })
    }

    pub fn current_period(&self) -> u64 {
        self.current_tick / self.ticks_per_period
    }

    pub fn period_start_tick(&self, period: u64) -> u64 {
        period * self.ticks_per_period
    }

    pub fn now(&self) -> f64 {
        self.current_tick as f64 * self.tick
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Never,
    Always,
    Island,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Never, PolicyKind::Always, PolicyKind::Island];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Never => "never",
            PolicyKind::Always => "always",
            PolicyKind::Island => "island",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a stay that outlasts the rest of the period enters the expected outage time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StayTruncation {
    /// Only stays ending inside the period count (`τ ≤ T − t`).
    #[default]
    Exclude,
    /// Longer stays count for the remaining `T − t` seconds.
    Censor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutParams {
    pub samples: usize,
    /// Step length used inside rollouts, seconds.
    pub tick: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub region: GeoRegion,
    pub classes: Vec<MobilityClass>,
    /// Target UE density inside coverage, 1/km².
    pub density: f64,
    pub vnfs: Vec<VnfSpec>,
    pub tick: f64,
    pub period: f64,
    pub periods_per_day: u64,
    pub days: u64,
    pub seed: u64,
    pub policies: Vec<PolicyKind>,
    pub rollout: RolloutParams,
    /// Past periods feeding the edge-driven statistics.
    pub history_window: u64,
    /// Periods simulated before accounting starts.
    pub warmup_periods: u64,
    pub stay_truncation: StayTruncation,
}

impl ScenarioConfig {
    pub fn clock(&self) -> Option<SimClock> {
        SimClock::new(self.tick, self.period)
    }

    pub fn total_periods(&self) -> u64 {
        self.days * self.periods_per_day
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    NonFinite,
    InvalidRadius,
    DiscOutsideBounds,
    InvalidDensity,
    NoMobilityClasses,
    InvalidSpeedRange,
    InvalidPauseRange,
    InvalidShare,
    SharesNotNormalized,
    NoVnfs,
    DuplicateVnfId,
    NegativeCost,
    NegativeLoss,
    InvalidDuty,
    NegativeRate,
    InvalidTick,
    PeriodNotMultiple,
    DurationTooShort,
    NoPolicies,
    InvalidRollout,
    InvalidWindow,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::NonFinite => "NON_FINITE",
            ViolationCode::InvalidRadius => "INVALID_RADIUS",
            ViolationCode::DiscOutsideBounds => "DISC_OUTSIDE_BOUNDS",
            ViolationCode::InvalidDensity => "INVALID_DENSITY",
            ViolationCode::NoMobilityClasses => "NO_MOBILITY_CLASSES",
            ViolationCode::InvalidSpeedRange => "INVALID_SPEED_RANGE",
            ViolationCode::InvalidPauseRange => "INVALID_PAUSE_RANGE",
            ViolationCode::InvalidShare => "INVALID_SHARE",
            ViolationCode::SharesNotNormalized => "SHARES_NOT_NORMALIZED",
            ViolationCode::NoVnfs => "NO_VNFS",
            ViolationCode::DuplicateVnfId => "DUPLICATE_VNF_ID",
            ViolationCode::NegativeCost => "NEGATIVE_COST",
            ViolationCode::NegativeLoss => "NEGATIVE_LOSS",
            ViolationCode::InvalidDuty => "INVALID_DUTY",
            ViolationCode::NegativeRate => "NEGATIVE_RATE",
            ViolationCode::InvalidTick => "INVALID_TICK",
            ViolationCode::PeriodNotMultiple => "PERIOD_NOT_MULTIPLE",
            ViolationCode::DurationTooShort => "DURATION_TOO_SHORT",
            ViolationCode::NoPolicies => "NO_POLICIES",
            ViolationCode::InvalidRollout => "INVALID_ROLLOUT",
            ViolationCode::InvalidWindow => "INVALID_WINDOW",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

/// Every invariant violation of a configuration, in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<Violation>);

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn codes(&self) -> Vec<ViolationCode> {
        self.0.iter().map(|v| v.code).collect()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration violation(s):", self.0.len())?;
        for v in &self.0 {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks every invariant and reports all violations, not just the first.
pub fn validate_config(config: ScenarioConfig) -> Result<ScenarioConfig, ConfigErrors> {
    let mut out = Vec::new();
    let mut push = |code: ViolationCode, message: String| out.push(Violation { code, message });

    let region = &config.region;
    let coords = [
        region.center.x,
        region.center.y,
        region.radius,
        region.bounds.min.x,
        region.bounds.min.y,
        region.bounds.max.x,
        region.bounds.max.y,
    ];
    if coords.iter().any(|v| !v.is_finite()) {
        push(ViolationCode::NonFinite, "world geometry has non-finite values".into());
    } else {
        if region.radius <= 0.0 {
            push(
                ViolationCode::InvalidRadius,
                format!("radius {} m must be positive", region.radius),
            );
        }
        let b = &region.bounds;
        let r = region.radius.max(0.0);
        if b.min.x >= b.max.x
            || b.min.y >= b.max.y
            || region.center.x - r < b.min.x
            || region.center.x + r > b.max.x
            || region.center.y - r < b.min.y
            || region.center.y + r > b.max.y
        {
            push(
                ViolationCode::DiscOutsideBounds,
                "coverage disc must lie inside the world bounds".into(),
            );
        }
    }
    if !(config.density.is_finite() && config.density >= 0.0) {
        push(
            ViolationCode::InvalidDensity,
            format!("density {} /km² must be non-negative", config.density),
        );
    }

    if config.classes.is_empty() {
        push(
            ViolationCode::NoMobilityClasses,
            "at least one mobility class is required".into(),
        );
    }
    let mut share_sum = 0.0;
    for class in &config.classes {
        let [v0, v1] = class.speed;
        let [p0, p1] = class.pause;
        if !(v0.is_finite() && v1.is_finite() && 0.0 <= v0 && v0 <= v1) {
            push(
                ViolationCode::InvalidSpeedRange,
                format!("class {}: speed range [{v0}, {v1}]", class.name),
            );
        }
        if !(p0.is_finite() && p1.is_finite() && 0.0 <= p0 && p0 <= p1) {
            push(
                ViolationCode::InvalidPauseRange,
                format!("class {}: pause range [{p0}, {p1}]", class.name),
            );
        }
        if !(class.share.is_finite() && (0.0..=1.0).contains(&class.share)) {
            push(
                ViolationCode::InvalidShare,
                format!("class {}: share {}", class.name, class.share),
            );
        }
        share_sum += class.share;
    }
    if !config.classes.is_empty() && (share_sum - 1.0).abs() > SHARE_TOLERANCE {
        push(
            ViolationCode::SharesNotNormalized,
            format!("class shares sum to {share_sum}, not 1"),
        );
    }

    if config.vnfs.is_empty() {
        push(ViolationCode::NoVnfs, "at least one VNF is required".into());
    }
    let mut ids = BTreeSet::new();
    for vnf in &config.vnfs {
        if !ids.insert(vnf.id.as_str()) {
            push(
                ViolationCode::DuplicateVnfId,
                format!("VNF id {:?} appears twice", vnf.id),
            );
        }
        if !(vnf.migration_cost.is_finite() && vnf.migration_cost >= 0.0) {
            push(
                ViolationCode::NegativeCost,
                format!("VNF {}: migration cost {}", vnf.id, vnf.migration_cost),
            );
        }
        if !(vnf.loss_rate.is_finite() && vnf.loss_rate >= 0.0) {
            push(
                ViolationCode::NegativeLoss,
                format!("VNF {}: loss rate {}", vnf.id, vnf.loss_rate),
            );
        }
        if !(vnf.duty.is_finite() && (0.0..=1.0).contains(&vnf.duty)) {
            push(ViolationCode::InvalidDuty, format!("VNF {}: duty {}", vnf.id, vnf.duty));
        }
        for (name, rate) in [("failure", vnf.failure_rate), ("repair", vnf.repair_rate)] {
            if !(rate.is_finite() && rate >= 0.0) {
                push(
                    ViolationCode::NegativeRate,
                    format!("VNF {}: {name} rate {rate}", vnf.id),
                );
            }
        }
    }

    let tick_ok = config.tick.is_finite() && config.tick > 0.0;
    let period_ok = config.period.is_finite() && config.period > 0.0;
    if !tick_ok || !period_ok {
        push(
            ViolationCode::InvalidTick,
            format!("tick {} s and period {} s must be positive", config.tick, config.period),
        );
    } else if config.clock().is_none() {
        push(
            ViolationCode::PeriodNotMultiple,
            format!(
                "period {} s is not a whole multiple of tick {} s",
                config.period, config.tick
            ),
        );
    }
    if config.periods_per_day == 0 || config.days == 0 {
        push(
            ViolationCode::DurationTooShort,
            "the run must cover at least one period".into(),
        );
    }
    if config.policies.is_empty() {
        push(
            ViolationCode::NoPolicies,
            "at least one policy must be evaluated".into(),
        );
    }
    let rollout = &config.rollout;
    if rollout.samples == 0 || rollout.bins == 0 || !(rollout.tick.is_finite() && rollout.tick > 0.0) {
        push(
            ViolationCode::InvalidRollout,
            format!(
                "rollout needs samples >= 1, bins >= 1 and a positive tick (got {}, {}, {})",
                rollout.samples, rollout.bins, rollout.tick
            ),
        );
    } else if period_ok && rollout.tick > config.period {
        push(ViolationCode::InvalidRollout, "rollout tick exceeds the period".into());
    }
    if config.history_window == 0 {
        push(
            ViolationCode::InvalidWindow,
            "history window must be at least one period".into(),
        );
    }

    if out.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(out))
    }
}

/// Number of UEs spawned over the whole world so that the coverage disc holds
/// `density × area` of them in expectation.
pub fn population_size(config: &ScenarioConfig) -> usize {
    let world_km2 = config.region.bounds.area() * 1e-6;
    (config.density * world_km2).round() as usize
}

/// Places UEs uniformly over the world bounds with classes drawn by share.
pub fn spawn_population<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Vec<UeState> {
    let n = population_size(config);
    if n == 0 {
        return Vec::new();
    }
    let shares = WeightedIndex::new(config.classes.iter().map(|c| c.share)).expect("validated class shares");
    let bounds = config.region.bounds;
    (0..n)
        .map(|i| {
            let class = shares.sample(rng);
            let position = bounds.sample(rng);
            let waypoint = bounds.sample(rng);
            let speed = config.classes[class].draw_speed(rng);
            UeState {
                id: i as UeId,
                position,
                waypoint,
                speed,
                pause_remaining: 0.0,
                class,
                in_coverage: config.region.covers(position),
            }
        })
        .collect()
}

/// Population for `config.seed` on its dedicated stream.
pub fn spawn_seeded(config: &ScenarioConfig) -> Vec<UeState> {
    spawn_population(config, &mut rng::stream(config.seed, Domain::Spawn, 0, 0))
}

/// Mobility classes used when a scenario does not define its own.
pub fn default_classes() -> Vec<MobilityClass> {
    vec![
        MobilityClass {
            name: "pedestrian".into(),
            speed: [0.5, 1.5],
            pause: [0.0, 300.0],
            share: 0.5,
        },
        MobilityClass {
            name: "vehicle".into(),
            speed: [8.0, 16.0],
            pause: [0.0, 60.0],
            share: 0.3,
        },
        MobilityClass {
            name: "static".into(),
            speed: [0.0, 0.0],
            pause: [0.0, 0.0],
            share: 0.2,
        },
    ]
}

/// The reference scenario: a 2 km disc (4π km²) in an 8 km square world at
/// 187.23 UEs/km², two VNFs with `c_m = 20·T·l` and `100·T·l`, `η = 1`.
pub fn reference_config() -> ScenarioConfig {
    let period = 3600.0;
    let loss_rate = 1.0;
    let center = Point::new(0.0, 0.0);
    ScenarioConfig {
        region: GeoRegion {
            center,
            radius: 2000.0,
            bounds: Rect::centered_square(center, 8000.0),
        },
        classes: default_classes(),
        density: 187.23,
        vnfs: vec![
            VnfSpec {
                id: "F1".into(),
                migration_cost: 20.0 * period * loss_rate,
                duty: 1.0,
                loss_rate,
                estimator: EstimatorKind::UeDriven,
                failure_rate: 2e-5,
                repair_rate: 4e-4,
            },
            VnfSpec {
                id: "F2".into(),
                migration_cost: 100.0 * period * loss_rate,
                duty: 1.0,
                loss_rate,
                estimator: EstimatorKind::EdgeDriven,
                failure_rate: 5e-6,
                repair_rate: 4e-4,
            },
        ],
        tick: 1.0,
        period,
        periods_per_day: 24,
        days: 30,
        seed: 1,
        policies: PolicyKind::ALL.to_vec(),
        rollout: RolloutParams {
            samples: 2,
            tick: 30.0,
            bins: 60,
        },
        history_window: 24,
        warmup_periods: 0,
        stay_truncation: StayTruncation::Exclude,
    }
}
