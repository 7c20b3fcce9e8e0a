//! Opportunity cost of a central-cloud VNF outage and the per-period
//! synchronize/skip rule.
//!
//! Per UE, the expected outage time over the next period `T` is
//!
//! ```text
//! E{t_o,u} = p_o · η_u · ∫₀ᵀ f_arr(t) ∫₀^{T−t} τ f_stay(τ) dτ dt
//! ```
//!
//! and the UE-driven cost sums it over all UEs times the unit loss `l`. The
//! edge-driven cost replaces the per-UE terms with the mean served count and
//! the truncated mean stay of the aggregate stay density. A redundancy is
//! synchronized exactly when `c_m ≤ c_o`.

use serde::Serialize;
use thiserror::Error;

use crate::histogram::{DensityError, HistogramDensity};
use crate::mobility::MobilityStats;
use crate::world::{EstimatorKind, StayTruncation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    InvalidDensity(#[from] DensityError),
    #[error("INVALID_INPUT: {0}")]
    InvalidInput(String),
}

fn check_fraction(name: &str, v: f64) -> Result<(), EstimatorError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(EstimatorError::InvalidInput(format!("{name} = {v} is not in [0, 1]")))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<(), EstimatorError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(EstimatorError::InvalidInput(format!(
            "{name} = {v} is negative or not finite"
        )))
    }
}

fn check_covers(density: &HistogramDensity, period: f64) -> Result<(), EstimatorError> {
    density.validate()?;
    let horizon = density.horizon();
    if period > horizon * (1.0 + 1e-12) {
        return Err(DensityError::Horizon {
            horizon,
            needed: period,
        }
        .into());
    }
    Ok(())
}

/// Expected outage seconds of one UE over the next period, with stays that
/// outlast the period excluded as the integral bound implies.
pub fn expected_outage_time(
    outage_rate: f64,
    duty: f64,
    arrival: &HistogramDensity,
    stay: &HistogramDensity,
    period: f64,
) -> Result<f64, EstimatorError> {
    expected_outage_time_with(outage_rate, duty, arrival, stay, period, StayTruncation::Exclude)
}

/// [`expected_outage_time`] with an explicit treatment of long stays.
///
/// The outer integral uses each arrival bin's mean as its node (the midpoint
/// rule generalized to weighted bins); the inner integral comes from a prefix
/// table over the stay bins, so the cost is O(bins).
pub fn expected_outage_time_with(
    outage_rate: f64,
    duty: f64,
    arrival: &HistogramDensity,
    stay: &HistogramDensity,
    period: f64,
    truncation: StayTruncation,
) -> Result<f64, EstimatorError> {
    check_fraction("p_o", outage_rate)?;
    check_fraction("eta", duty)?;
    if !(period.is_finite() && period > 0.0) {
        return Err(EstimatorError::InvalidInput(format!(
            "period {period} must be positive"
        )));
    }
    check_covers(arrival, period)?;
    check_covers(stay, period)?;

    let scale = outage_rate * duty;
    if scale == 0.0 {
        return Ok(0.0);
    }
    let stay_table = stay.prefix_table();
    let stay_total = stay.total_mass();
    let mut integral = 0.0;
    for bin in arrival.bins() {
        if bin.mass == 0.0 || bin.lo > period {
            continue;
        }
        // Arrival bins straddling the period end keep only their share inside it,
        // placed at that share's own mean.
        let (mass, at) = if bin.hi <= period {
            (bin.mass, bin.mean)
        } else {
            let (mass, moment) = bin.portion_below(period);
            if mass == 0.0 {
                continue;
            }
            (mass, (moment / mass).min(period))
        };
        let remaining = period - at;
        let (below, moment) = stay_table.below(remaining);
        let inner = match truncation {
            StayTruncation::Exclude => moment,
            StayTruncation::Censor => moment + remaining * (stay_total - below).max(0.0),
        };
        integral += mass * inner;
    }
    Ok((scale * integral).clamp(0.0, scale * period))
}

/// Inputs behind an opportunity-cost figure, kept for audit output.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CostInputs {
    pub outage_rate: Option<f64>,
    pub period: Option<f64>,
    pub loss_rate: f64,
    pub mean_served: Option<f64>,
    pub mean_duty: Option<f64>,
    pub truncated_mean_stay: Option<f64>,
    pub empty_history: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpportunityCost {
    pub value: f64,
    pub method: EstimatorKind,
    /// Number of UEs summed (UE-driven only).
    pub contributing_ues: Option<usize>,
    pub inputs: CostInputs,
}

impl OpportunityCost {
    /// Records the outage rate and period the per-UE times were computed with.
    pub fn with_context(mut self, outage_rate: f64, period: f64) -> Self {
        self.inputs.outage_rate = Some(outage_rate);
        self.inputs.period = Some(period);
        self
    }
}

/// Correctly rounded sum (Shewchuk's exact partials), so a sum of `n` equal
/// terms is bit-identical to `n` times the term.
fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials (largest last) to one double, half-even.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// `c_o = Σ_u l · E{t_o,u}`.
pub fn opportunity_cost_ue(outage_times: &[f64], loss_rate: f64) -> Result<OpportunityCost, EstimatorError> {
    check_non_negative("l", loss_rate)?;
    for &t in outage_times {
        check_non_negative("E{t_o,u}", t)?;
    }
    Ok(OpportunityCost {
        value: exact_sum(outage_times.iter().map(|&t| loss_rate * t)),
        method: EstimatorKind::UeDriven,
        contributing_ues: Some(outage_times.len()),
        inputs: CostInputs {
            loss_rate,
            ..CostInputs::default()
        },
    })
}

/// `ĉ_o = l · N̄ · η̄ · p_o · E[min(τ, T)]` over the aggregate stay density.
///
/// The stay term is the truncated mean stay time, so the estimate has the
/// same units as the UE-driven sum. An empty history yields zero with the
/// flag set.
pub fn opportunity_cost_edge(
    stats: &MobilityStats,
    mean_duty: f64,
    outage_rate: f64,
    period: f64,
    loss_rate: f64,
) -> Result<OpportunityCost, EstimatorError> {
    check_fraction("eta", mean_duty)?;
    check_fraction("p_o", outage_rate)?;
    check_non_negative("l", loss_rate)?;
    check_non_negative("N", stats.mean_served)?;
    if !(period.is_finite() && period > 0.0) {
        return Err(EstimatorError::InvalidInput(format!(
            "period {period} must be positive"
        )));
    }
    let mut inputs = CostInputs {
        outage_rate: Some(outage_rate),
        period: Some(period),
        loss_rate,
        mean_served: Some(stats.mean_served),
        mean_duty: Some(mean_duty),
        truncated_mean_stay: None,
        empty_history: stats.empty_history,
    };
    let value = if stats.empty_history {
        0.0
    } else {
        check_covers(&stats.stay, period)?;
        let stay = stats.stay.truncated_mean(period);
        inputs.truncated_mean_stay = Some(stay);
        loss_rate * stats.mean_served * mean_duty * outage_rate * stay
    };
    Ok(OpportunityCost {
        value,
        method: EstimatorKind::EdgeDriven,
        contributing_ues: None,
        inputs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncAction {
    Synchronize,
    Skip,
}

impl SyncAction {
    pub fn as_str(self) -> &'static str {
        match self {
            SyncAction::Synchronize => "synchronize",
            SyncAction::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncDecision {
    pub action: SyncAction,
    pub migration_cost: f64,
    pub opportunity_cost: f64,
    pub vnf: String,
    pub period: u64,
}

/// Synchronize iff `c_m ≤ c_o`; ties synchronize.
pub fn decide_sync(migration_cost: f64, cost: &OpportunityCost, vnf: &str, period: u64) -> SyncDecision {
    debug_assert!(migration_cost >= 0.0);
    let action = if migration_cost <= cost.value {
        SyncAction::Synchronize
    } else {
        SyncAction::Skip
    };
    SyncDecision {
        action,
        migration_cost,
        opportunity_cost: cost.value,
        vnf: vnf.to_string(),
        period,
    }
}
