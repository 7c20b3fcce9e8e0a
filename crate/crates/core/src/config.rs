//! TOML scenario files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{
    validate_config, ConfigErrors, EstimatorKind, GeoRegion, MobilityClass, Point, PolicyKind, Rect, RolloutParams,
    ScenarioConfig, StayTruncation, VnfSpec,
};

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("CONFIG_IO: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CONFIG_PARSE: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("CONFIG_PARSE: table key `{0}` must be a non-negative integer")]
    Key(String),
    #[error("{0}")]
    Invalid(#[from] ConfigErrors),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub world: WorldSection,
    pub mobility: MobilitySection,
    pub vnf: BTreeMap<String, VnfSection>,
    pub clock: ClockSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSection {
    pub center_m: [f64; 2],
    pub radius_m: f64,
    /// `[min_x, min_y, max_x, max_y]`
    pub bounds_m: [f64; 4],
    pub density_per_km2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySection {
    pub classes: BTreeMap<String, ClassSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSection {
    pub name: String,
    pub speed_mps: [f64; 2],
    pub pause_s: [f64; 2],
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnfSection {
    pub id: String,
    pub migration_cost: f64,
    pub duty: f64,
    pub loss_rate_per_s: f64,
    pub estimator: EstimatorKind,
    pub failure_rate_per_s: f64,
    pub repair_rate_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSection {
    pub tick_s: f64,
    pub period_s: f64,
    pub periods_per_day: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub days: u64,
    pub seed: u64,
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_rollout_samples")]
    pub rollout_samples: usize,
    #[serde(default = "default_rollout_tick")]
    pub rollout_tick_s: f64,
    #[serde(default = "default_rollout_bins")]
    pub rollout_bins: usize,
    #[serde(default = "default_history_window")]
    pub history_window: u64,
    #[serde(default)]
    pub warmup_periods: u64,
    #[serde(default)]
    pub stay_truncation: StayTruncation,
}

fn default_rollout_samples() -> usize {
    2
}

fn default_rollout_tick() -> f64 {
    30.0
}

fn default_rollout_bins() -> usize {
    60
}

fn default_history_window() -> u64 {
    24
}

fn numbered<T: Clone>(table: &BTreeMap<String, T>) -> Result<Vec<T>, ConfigFileError> {
    let mut keyed = table
        .iter()
        .map(|(k, v)| {
            k.parse::<u64>()
                .map(|n| (n, v.clone()))
                .map_err(|_| ConfigFileError::Key(k.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    keyed.sort_by_key(|(n, _)| *n);
    Ok(keyed.into_iter().map(|(_, v)| v).collect())
}

impl FileConfig {
    pub fn into_scenario(self) -> Result<ScenarioConfig, ConfigFileError> {
        let w = self.world;
        let classes = numbered(&self.mobility.classes)?
            .into_iter()
            .map(|c| MobilityClass {
                name: c.name,
                speed: c.speed_mps,
                pause: c.pause_s,
                share: c.share,
            })
            .collect();
        let vnfs = numbered(&self.vnf)?
            .into_iter()
            .map(|v| VnfSpec {
                id: v.id,
                migration_cost: v.migration_cost,
                duty: v.duty,
                loss_rate: v.loss_rate_per_s,
                estimator: v.estimator,
                failure_rate: v.failure_rate_per_s,
                repair_rate: v.repair_rate_per_s,
            })
            .collect();
        let r = self.run;
        Ok(ScenarioConfig {
            region: GeoRegion {
                center: Point::new(w.center_m[0], w.center_m[1]),
                radius: w.radius_m,
                bounds: Rect {
                    min: Point::new(w.bounds_m[0], w.bounds_m[1]),
                    max: Point::new(w.bounds_m[2], w.bounds_m[3]),
                },
            },
            classes,
            density: w.density_per_km2,
            vnfs,
            tick: self.clock.tick_s,
            period: self.clock.period_s,
            periods_per_day: self.clock.periods_per_day,
            days: r.days,
            seed: r.seed,
            policies: r.policies,
            rollout: RolloutParams {
                samples: r.rollout_samples,
                tick: r.rollout_tick_s,
                bins: r.rollout_bins,
            },
            history_window: r.history_window,
            warmup_periods: r.warmup_periods,
            stay_truncation: r.stay_truncation,
        })
    }

    pub fn from_scenario(c: &ScenarioConfig) -> Self {
        let b = c.region.bounds;
        Self {
            world: WorldSection {
                center_m: [c.region.center.x, c.region.center.y],
                radius_m: c.region.radius,
                bounds_m: [b.min.x, b.min.y, b.max.x, b.max.y],
                density_per_km2: c.density,
            },
            mobility: MobilitySection {
                classes: c
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        (
                            i.to_string(),
                            ClassSection {
                                name: m.name.clone(),
                                speed_mps: m.speed,
                                pause_s: m.pause,
                                share: m.share,
                            },
                        )
                    })
                    .collect(),
            },
            vnf: c
                .vnfs
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    (
                        i.to_string(),
                        VnfSection {
                            id: v.id.clone(),
                            migration_cost: v.migration_cost,
                            duty: v.duty,
                            loss_rate_per_s: v.loss_rate,
                            estimator: v.estimator,
                            failure_rate_per_s: v.failure_rate,
                            repair_rate_per_s: v.repair_rate,
                        },
                    )
                })
                .collect(),
            clock: ClockSection {
                tick_s: c.tick,
                period_s: c.period,
                periods_per_day: c.periods_per_day,
            },
            run: RunSection {
                days: c.days,
                seed: c.seed,
                policies: c.policies.clone(),
                rollout_samples: c.rollout.samples,
                rollout_tick_s: c.rollout.tick,
                rollout_bins: c.rollout.bins,
                history_window: c.history_window,
                warmup_periods: c.warmup_periods,
                stay_truncation: c.stay_truncation,
            },
        }
    }
}

/// Parses and validates a scenario from TOML text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigFileError> {
    let file: FileConfig = toml::from_str(text)?;
    Ok(validate_config(file.into_scenario()?)?)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn to_toml(config: &ScenarioConfig) -> String {
    toml::to_string(&FileConfig::from_scenario(config)).expect("scenario serializes")
}
