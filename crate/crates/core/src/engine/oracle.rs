//! Exact expected costs of tiny instances by enumeration.

use thiserror::Error;

use crate::availability::{predict_outage_rate, AvailabilityChain};
use crate::estimator::SyncAction;
use crate::histogram::HistogramDensity;

pub const MAX_TINY_UES: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("tiny instances hold at most {MAX_TINY_UES} UEs (got {0})")]
    TooManyUes(usize),
    #[error("UE {ue}: {which} density bin {bin} is not a point mass")]
    NotPointMass { ue: usize, which: &'static str, bin: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TinyUe {
    pub arrival: HistogramDensity,
    pub stay: HistogramDensity,
    pub duty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TinyInstance {
    pub ues: Vec<TinyUe>,
    pub chain: AvailabilityChain,
    pub migration_cost: f64,
    pub loss_rate: f64,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedCosts {
    pub sync: f64,
    pub skip: f64,
}

impl ExpectedCosts {
    /// Cheaper action, or `None` on an exact tie.
    pub fn optimal(&self) -> Option<SyncAction> {
        if self.sync < self.skip {
            Some(SyncAction::Synchronize)
        } else if self.skip < self.sync {
            Some(SyncAction::Skip)
        } else {
            None
        }
    }
}

fn atoms(d: &HistogramDensity, ue: usize, which: &'static str) -> Result<Vec<(f64, f64)>, OracleError> {
    d.bins()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.mass > 0.0)
        .map(|(bin, b)| {
            if b.lo == b.hi {
                Ok((b.lo, b.mass))
            } else {
                Err(OracleError::NotPointMass { ue, which, bin })
            }
        })
        .collect()
}

/// Expected period cost of synchronizing (`c_m`, loss fully avoided) and of
/// skipping (`l · p_o · Σ_u η_u · E[τ · 1{τ ≤ T − t}]`), enumerating every
/// arrival/stay atom pair. Tail masses never arrive or never leave within the
/// period and add nothing.
pub fn brute_force_expected_cost(instance: &TinyInstance) -> Result<ExpectedCosts, OracleError> {
    if instance.ues.len() > MAX_TINY_UES {
        return Err(OracleError::TooManyUes(instance.ues.len()));
    }
    let p_o = predict_outage_rate(&instance.chain, instance.period).outage_rate;
    let mut skip = 0.0;
    for (u, ue) in instance.ues.iter().enumerate() {
        let arrivals = atoms(&ue.arrival, u, "arrival")?;
        let stays = atoms(&ue.stay, u, "stay")?;
        let mut exposure = 0.0;
        for &(t, pa) in &arrivals {
            for &(tau, ps) in &stays {
                if t <= instance.period && tau <= instance.period - t {
                    exposure += pa * ps * tau;
                }
            }
        }
        skip += ue.duty * exposure;
    }
    Ok(ExpectedCosts {
        sync: instance.migration_cost,
        skip: instance.loss_rate * p_o * skip,
    })
}
