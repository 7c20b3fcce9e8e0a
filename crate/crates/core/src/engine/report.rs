use serde::Serialize;

use crate::estimator::{OpportunityCost, SyncAction};
use crate::world::{PolicyKind, ScenarioConfig, UeState};

/// Outcome of one VNF under one policy in one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VnfPeriod {
    pub vnf: String,
    pub action: SyncAction,
    /// Opportunity-cost estimate behind an island decision.
    pub estimate: Option<OpportunityCost>,
    /// `c_m` when synchronized, otherwise 0.
    pub migration_charged: f64,
    pub outage_loss: f64,
    /// Seconds the central VNF was down, independent of the policy.
    pub outage_seconds: f64,
    /// On-duty in-coverage UE-ticks while the VNF was down.
    pub exposed_ue_ticks: u64,
    /// In-coverage UE time in units of whole periods.
    pub ue_periods_served: f64,
}

impl VnfPeriod {
    pub fn total_cost(&self) -> f64 {
        self.migration_charged + self.outage_loss
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodReport {
    /// Accounting period index (warm-up periods excluded).
    pub period: u64,
    pub policy: PolicyKind,
    pub vnfs: Vec<VnfPeriod>,
    /// Time-averaged number of UEs in coverage.
    pub ue_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DayTotals {
    pub day: u64,
    pub policy: PolicyKind,
    pub vnf: String,
    pub sync_periods: u64,
    pub migration_cost: f64,
    pub outage_loss: f64,
    pub total_cost: f64,
    pub outage_seconds: f64,
    pub ue_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub seed: u64,
    pub config: ScenarioConfig,
    pub periods: Vec<PeriodReport>,
    pub days: Vec<DayTotals>,
    /// Realized fraction of accounted time each VNF was up.
    pub availability: Vec<f64>,
    /// Time-averaged in-coverage UE count over the accounted periods.
    pub mean_in_coverage: f64,
    /// `mean_in_coverage` per km² of coverage.
    pub realized_density: f64,
}

impl ScenarioReport {
    /// Mean daily total cost of `policy` for the VNF at `vnf`.
    pub fn mean_daily_cost(&self, policy: PolicyKind, vnf: &str) -> f64 {
        let days: Vec<f64> = self
            .days
            .iter()
            .filter(|d| d.policy == policy && d.vnf == vnf)
            .map(|d| d.total_cost)
            .collect();
        if days.is_empty() {
            return 0.0;
        }
        days.iter().sum::<f64>() / days.len() as f64
    }
}

/// Sums one day's period reports into per-policy, per-VNF totals, in order.
pub fn day_totals(day: u64, periods: &[PeriodReport], policies: &[PolicyKind]) -> Vec<DayTotals> {
    let mut out = Vec::new();
    for &policy in policies {
        let rows: Vec<&PeriodReport> = periods.iter().filter(|p| p.policy == policy).collect();
        let Some(first) = rows.first() else { continue };
        for (v, vnf) in first.vnfs.iter().enumerate() {
            let mut totals = DayTotals {
                day,
                policy,
                vnf: vnf.vnf.clone(),
                sync_periods: 0,
                migration_cost: 0.0,
                outage_loss: 0.0,
                total_cost: 0.0,
                outage_seconds: 0.0,
                ue_count: 0.0,
            };
            for row in &rows {
                let r = &row.vnfs[v];
                totals.sync_periods += (r.action == SyncAction::Synchronize) as u64;
                totals.migration_cost += r.migration_charged;
                totals.outage_loss += r.outage_loss;
                totals.outage_seconds += r.outage_seconds;
                totals.ue_count += row.ue_count;
            }
            totals.total_cost = totals.migration_cost + totals.outage_loss;
            totals.ue_count /= rows.len() as f64;
            out.push(totals);
        }
    }
    out
}

/// World state at one tick, before the tick's motion is applied.
#[derive(Debug)]
pub struct TickView<'a> {
    pub tick: u64,
    pub ues: &'a [UeState],
    pub vnf_down: &'a [bool],
}

/// Receives structured records as the engine produces them.
pub trait ReportSink {
    /// Whether [`ReportSink::on_tick`] should be called at all.
    fn wants_ticks(&self) -> bool {
        false
    }

    fn on_tick(&mut self, _view: &TickView<'_>) {}

    fn on_period(&mut self, _report: &PeriodReport) {}

    fn on_day(&mut self, _totals: &[DayTotals]) {}
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl ReportSink for NullSink {}
