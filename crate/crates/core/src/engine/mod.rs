//! Discrete-time simulation of one island under several policies at once.
//!
//! The world (UE motion, VNF availability, duty draws) evolves once; each
//! policy only changes the accounting. Policies therefore see common random
//! numbers and their costs differ only through their decisions.

pub mod oracle;
pub mod report;

use std::collections::BTreeMap;

use rand_distr::{Binomial, Distribution};

use crate::availability::{predict_outage_rate, AvailabilityChain};
use crate::estimator::{
    decide_sync, expected_outage_time_with, opportunity_cost_edge, opportunity_cost_ue, EstimatorError,
    OpportunityCost, SyncAction,
};
use crate::mobility::{aggregate_stats, rollout_densities, CoverageEvent, EpisodeLog, MobilityModel, UeDensities};
use crate::rng::{stream, Domain, SimRng};
use crate::world::{
    spawn_seeded, validate_config, ConfigErrors, EstimatorKind, PolicyKind, ScenarioConfig, SimClock, UeId, UeState,
};

pub use report::{day_totals, DayTotals, NullSink, PeriodReport, ReportSink, ScenarioReport, TickView, VnfPeriod};

/// A synchronization policy. The island policy uses each VNF's configured
/// estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Never,
    Always,
    Island { estimators: Vec<EstimatorKind> },
}

impl Policy {
    pub fn from_kind(kind: PolicyKind, config: &ScenarioConfig) -> Self {
        match kind {
            PolicyKind::Never => Policy::Never,
            PolicyKind::Always => Policy::Always,
            PolicyKind::Island => Policy::Island {
                estimators: config.vnfs.iter().map(|v| v.estimator).collect(),
            },
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Never => PolicyKind::Never,
            Policy::Always => PolicyKind::Always,
            Policy::Island { .. } => PolicyKind::Island,
        }
    }
}

/// Mutable world state plus the random streams that drive it.
#[derive(Debug, Clone)]
pub struct World {
    config: ScenarioConfig,
    clock: SimClock,
    model: MobilityModel,
    ues: Vec<UeState>,
    motion: Vec<SimRng>,
    chains: Vec<AvailabilityChain>,
    chain_rngs: Vec<SimRng>,
    duty_rngs: Vec<SimRng>,
    episodes: EpisodeLog,
    in_coverage: u64,
    warmup_done: u64,
}

impl World {
    /// Seeded world for a validated configuration.
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigErrors> {
        let config = validate_config(config)?;
        let ues = spawn_seeded(&config);
        let seed = config.seed;
        let chains = config
            .vnfs
            .iter()
            .enumerate()
            .map(|(v, spec)| {
                let mut rng = stream(seed, Domain::Chain, v as u64, u64::MAX);
                AvailabilityChain::stationary(spec.failure_rate, spec.repair_rate, &mut rng)
            })
            .collect();
        Ok(Self::from_parts(config, ues, chains))
    }

    /// World with a given population and chain states; the configuration is
    /// assumed valid.
    pub fn from_parts(config: ScenarioConfig, mut ues: Vec<UeState>, chains: Vec<AvailabilityChain>) -> Self {
        assert_eq!(chains.len(), config.vnfs.len(), "one chain per VNF");
        let clock = config.clock().expect("period must be a whole number of ticks");
        let model = MobilityModel::new(config.region, config.classes.clone());
        for ue in &mut ues {
            ue.in_coverage = model.region.covers(ue.position);
        }
        let seed = config.seed;
        let motion = ues
            .iter()
            .map(|u| stream(seed, Domain::Motion, u.id as u64, 0))
            .collect();
        let chain_rngs = (0..chains.len())
            .map(|v| stream(seed, Domain::Chain, v as u64, 0))
            .collect();
        let duty_rngs = (0..chains.len())
            .map(|v| stream(seed, Domain::Duty, v as u64, 0))
            .collect();
        let episodes = EpisodeLog::new(&ues, clock.current_tick);
        let in_coverage = ues.iter().filter(|u| u.in_coverage).count() as u64;
        Self {
            config,
            clock,
            model,
            ues,
            motion,
            chains,
            chain_rngs,
            duty_rngs,
            episodes,
            in_coverage,
            warmup_done: 0,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn clock(&self) -> &SimClock {
        &self.clock
    }

    pub fn ues(&self) -> &[UeState] {
        &self.ues
    }

    pub fn chains(&self) -> &[AvailabilityChain] {
        &self.chains
    }

    pub fn episodes(&self) -> &EpisodeLog {
        &self.episodes
    }

    /// Rollout densities of every UE from the current state, keyed by UE id.
    pub fn ue_densities(&self) -> BTreeMap<UeId, UeDensities> {
        let period = self.clock.current_period();
        self.ues
            .iter()
            .map(|ue| (ue.id, self.densities_of(ue, period)))
            .collect()
    }

    fn densities_of(&self, ue: &UeState, period: u64) -> UeDensities {
        let mut rng = stream(self.config.seed, Domain::Rollout, ue.id as u64, period);
        rollout_densities(&self.model, ue, self.config.period, &self.config.rollout, &mut rng)
    }

    /// Opportunity-cost estimates for every VNF from the current state.
    pub fn estimate_costs(&self, estimators: &[EstimatorKind]) -> Result<Vec<OpportunityCost>, EstimatorError> {
        let period = self.config.period;
        let p_o: Vec<f64> = self
            .chains
            .iter()
            .map(|c| predict_outage_rate(c, period).outage_rate)
            .collect();
        let ue_vnfs: Vec<usize> = (0..estimators.len())
            .filter(|&v| estimators[v] == EstimatorKind::UeDriven)
            .collect();
        let mut times: Vec<Vec<f64>> = vec![Vec::with_capacity(self.ues.len()); estimators.len()];
        if !ue_vnfs.is_empty() {
            let current = self.clock.current_period();
            for ue in &self.ues {
                let d = self.densities_of(ue, current);
                for &v in &ue_vnfs {
                    let spec = &self.config.vnfs[v];
                    times[v].push(expected_outage_time_with(
                        p_o[v],
                        spec.duty,
                        &d.arrival,
                        &d.stay,
                        period,
                        self.config.stay_truncation,
                    )?);
                }
            }
        }
        let stats = if ue_vnfs.len() < estimators.len() {
            let snapshot = self.episodes.snapshot();
            Some(aggregate_stats(
                &snapshot,
                self.config.history_window,
                &self.clock,
                self.config.rollout.bins,
            ))
        } else {
            None
        };
        estimators
            .iter()
            .enumerate()
            .map(|(v, kind)| {
                let spec = &self.config.vnfs[v];
                match kind {
                    EstimatorKind::UeDriven => {
                        opportunity_cost_ue(&times[v], spec.loss_rate).map(|c| c.with_context(p_o[v], period))
                    }
                    EstimatorKind::EdgeDriven => opportunity_cost_edge(
                        stats.as_ref().expect("stats gathered for edge-driven VNFs"),
                        spec.duty,
                        p_o[v],
                        period,
                        spec.loss_rate,
                    ),
                }
            })
            .collect()
    }

    /// Simulates one period and accounts it under each policy.
    ///
    /// Decisions use only the state at the period boundary. A synchronized
    /// VNF is charged its migration cost and loses nothing for the period;
    /// the copy is not carried into the next period.
    pub fn run_period(
        &mut self,
        policies: &[Policy],
        sink: &mut dyn ReportSink,
    ) -> Result<Vec<PeriodReport>, EstimatorError> {
        let n_vnf = self.chains.len();
        let mut actions: Vec<Vec<(SyncAction, Option<OpportunityCost>)>> = Vec::with_capacity(policies.len());
        for policy in policies {
            actions.push(match policy {
                Policy::Never => vec![(SyncAction::Skip, None); n_vnf],
                Policy::Always => vec![(SyncAction::Synchronize, None); n_vnf],
                Policy::Island { estimators } => {
                    let period = self.accounting_period();
                    self.estimate_costs(estimators)?
                        .into_iter()
                        .enumerate()
                        .map(|(v, cost)| {
                            let spec = &self.config.vnfs[v];
                            let d = decide_sync(spec.migration_cost, &cost, &spec.id, period);
                            log::debug!(
                                "period {period} {}: c_o={} c_m={} -> {}",
                                spec.id,
                                d.opportunity_cost,
                                d.migration_cost,
                                d.action.as_str()
                            );
                            (d.action, Some(cost))
                        })
                        .collect()
                }
            });
        }

        let dt = self.clock.tick;
        let k = self.clock.ticks_per_period;
        let mut exposed = vec![0u64; n_vnf];
        let mut down_ticks = vec![0u64; n_vnf];
        let mut covered_ticks = 0u64;
        let mut down_flags = vec![false; n_vnf];
        for _ in 0..k {
            let tick = self.clock.current_tick;
            covered_ticks += self.in_coverage;
            for v in 0..n_vnf {
                let down = self.chains[v].is_down();
                down_flags[v] = down;
                if down {
                    down_ticks[v] += 1;
                    exposed[v] += self.on_duty(v);
                }
            }
            if sink.wants_ticks() {
                sink.on_tick(&TickView {
                    tick,
                    ues: &self.ues,
                    vnf_down: &down_flags,
                });
            }
            let next = tick + 1;
            for (ue, rng) in self.ues.iter_mut().zip(self.motion.iter_mut()) {
                let before = ue.in_coverage;
                self.model.advance(ue, dt, rng);
                if before != ue.in_coverage {
                    let event = if ue.in_coverage {
                        self.in_coverage += 1;
                        CoverageEvent::Arrived { ue: ue.id, tick: next }
                    } else {
                        self.in_coverage -= 1;
                        CoverageEvent::Departed { ue: ue.id, tick: next }
                    };
                    self.episodes.apply(event);
                }
            }
            let now = next as f64 * dt;
            for (chain, rng) in self.chains.iter_mut().zip(self.chain_rngs.iter_mut()) {
                chain.step(dt, now, rng);
            }
            self.clock.current_tick = next;
        }
        let window_start = self.clock.current_period().saturating_sub(self.config.history_window);
        self.episodes.prune(self.clock.period_start_tick(window_start));

        let period = self.accounting_period().wrapping_sub(1);
        let ue_count = covered_ticks as f64 / k as f64;
        let ue_periods = covered_ticks as f64 * dt / self.config.period;
        let reports = policies
            .iter()
            .zip(actions)
            .map(|(policy, acts)| PeriodReport {
                period,
                policy: policy.kind(),
                ue_count,
                vnfs: acts
                    .into_iter()
                    .enumerate()
                    .map(|(v, (action, estimate))| {
                        let spec = &self.config.vnfs[v];
                        let synced = action == SyncAction::Synchronize;
                        VnfPeriod {
                            vnf: spec.id.clone(),
                            action,
                            estimate,
                            migration_charged: if synced { spec.migration_cost } else { 0.0 },
                            outage_loss: if synced {
                                0.0
                            } else {
                                outage_loss(spec.loss_rate, dt, exposed[v])
                            },
                            outage_seconds: down_ticks[v] as f64 * dt,
                            exposed_ue_ticks: exposed[v],
                            ue_periods_served: ue_periods,
                        }
                    })
                    .collect(),
            })
            .collect();
        Ok(reports)
    }

    /// Advances the world one period without accounting it.
    pub fn warm_up_period(&mut self) {
        self.run_period(&[], &mut NullSink)
            .expect("no estimates are made without policies");
        self.warmup_done += 1;
    }

    fn accounting_period(&self) -> u64 {
        self.clock.current_period().wrapping_sub(self.warmup_done)
    }

    fn on_duty(&mut self, v: usize) -> u64 {
        let duty = self.config.vnfs[v].duty;
        let n = self.in_coverage;
        if duty >= 1.0 {
            n
        } else if duty <= 0.0 || n == 0 {
            0
        } else {
            Binomial::new(n, duty)
                .expect("duty is a probability")
                .sample(&mut self.duty_rngs[v])
        }
    }
}

/// Loss of `exposed` on-duty UE-ticks, each `dt` seconds at rate `l`.
pub fn outage_loss(loss_rate: f64, dt: f64, exposed: u64) -> f64 {
    loss_rate * dt * exposed as f64
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Runs a whole scenario: warm-up, then `days × periods_per_day` accounted
/// periods under every configured policy.
pub fn run_scenario(config: ScenarioConfig, sink: &mut dyn ReportSink) -> Result<ScenarioReport, EngineError> {
    let mut world = World::new(config)?;
    let config = world.config().clone();
    let policies: Vec<Policy> = config.policies.iter().map(|&k| Policy::from_kind(k, &config)).collect();
    let kinds: Vec<PolicyKind> = config.policies.clone();
    for _ in 0..config.warmup_periods {
        world.warm_up_period();
    }

    let mut periods = Vec::new();
    let mut days = Vec::new();
    let mut down_seconds = vec![0.0; config.vnfs.len()];
    let mut coverage_sum = 0.0;
    for day in 0..config.days {
        let start = periods.len();
        for _ in 0..config.periods_per_day {
            let reports = world.run_period(&policies, sink)?;
            if let Some(first) = reports.first() {
                coverage_sum += first.ue_count;
                for (v, r) in first.vnfs.iter().enumerate() {
                    down_seconds[v] += r.outage_seconds;
                }
            }
            for r in &reports {
                sink.on_period(r);
            }
            periods.extend(reports);
        }
        let totals = day_totals(day, &periods[start..], &kinds);
        sink.on_day(&totals);
        days.extend(totals);
    }

    let accounted = config.total_periods() as f64;
    let horizon = accounted * config.period;
    let mean_in_coverage = coverage_sum / accounted;
    Ok(ScenarioReport {
        seed: config.seed,
        availability: down_seconds.iter().map(|d| 1.0 - d / horizon).collect(),
        mean_in_coverage,
        realized_density: mean_in_coverage / config.region.coverage_area_km2(),
        config,
        periods,
        days,
    })
}
