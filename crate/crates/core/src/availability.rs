//! Two-state (up/down) continuous-time Markov availability of a central VNF.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainState {
    Up,
    Down,
}

/// Largest `rate * dt` for which per-tick stepping is considered accurate.
pub const MAX_RATE_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityChain {
    /// Up to down, per second.
    pub failure_rate: f64,
    /// Down to up, per second.
    pub repair_rate: f64,
    pub state: ChainState,
    /// Simulation time at which `state` was entered, seconds.
    pub entered_at: f64,
}

impl AvailabilityChain {
    pub fn new(failure_rate: f64, repair_rate: f64, state: ChainState) -> Self {
        debug_assert!(failure_rate >= 0.0 && repair_rate >= 0.0);
        AvailabilityChain {
            failure_rate,
            repair_rate,
            state,
            entered_at: 0.0,
        }
    }

    /// Long-run fraction of time spent down. Zero when both rates vanish.
    pub fn stationary_down(&self) -> f64 {
        let total = self.failure_rate + self.repair_rate;
        if total > 0.0 {
            self.failure_rate / total
        } else {
            0.0
        }
    }

    /// Draws the initial state from the stationary distribution.
    pub fn stationary<R: Rng + ?Sized>(failure_rate: f64, repair_rate: f64, rng: &mut R) -> Self {
        let mut chain = Self::new(failure_rate, repair_rate, ChainState::Up);
        if rng.random::<f64>() < chain.stationary_down() {
            chain.state = ChainState::Down;
        }
        chain
    }

    pub fn is_down(&self) -> bool {
        self.state == ChainState::Down
    }

    /// Whether `dt` is fine enough for per-tick stepping at these rates.
    pub fn step_is_fine(&self, dt: f64) -> bool {
        self.failure_rate.max(self.repair_rate) * dt <= MAX_RATE_STEP
    }

    /// Advances one tick of length `dt` ending at time `now`: leaves the
    /// current state with probability `1 - exp(-rate * dt)`.
    pub fn step<R: Rng + ?Sized>(&mut self, dt: f64, now: f64, rng: &mut R) {
        let rate = match self.state {
            ChainState::Up => self.failure_rate,
            ChainState::Down => self.repair_rate,
        };
        if rate == 0.0 {
            return;
        }
        let p = -(-rate * dt).exp_m1();
        if rng.random::<f64>() < p {
            self.state = match self.state {
                ChainState::Up => ChainState::Down,
                ChainState::Down => ChainState::Up,
            };
            self.entered_at = now;
        }
    }
}

/// Value form of [`AvailabilityChain::step`].
pub fn step_chain<R: Rng + ?Sized>(chain: &AvailabilityChain, dt: f64, now: f64, rng: &mut R) -> AvailabilityChain {
    let mut next = chain.clone();
    next.step(dt, now, rng);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutagePrediction {
    /// Expected fraction of the next `horizon` seconds spent down.
    pub outage_rate: f64,
    pub horizon: f64,
    pub given: ChainState,
}

/// Expected downtime fraction over the next `horizon` seconds, conditioned on
/// the chain's current state.
///
/// With `s = λ_down + λ_up` and `π_d = λ_down / s`, the transient down
/// probability is `π_d (1 - e^{-st})` from up and `π_d + π_u e^{-st}` from
/// down. Averaging over `[0, T]` uses `(1/T)∫₀ᵀ e^{-st} dt = (1 - e^{-sT}) / (sT)`:
///
/// ```text
/// p_o | up   = π_d (1 - g),   p_o | down = π_d + π_u g,   g = (1 - e^{-sT}) / (sT)
/// ```
///
/// `g` is evaluated as `-expm1(-sT) / sT` so tiny `sT` stays accurate. With
/// both rates zero the state never changes.
pub fn predict_outage_rate(chain: &AvailabilityChain, horizon: f64) -> OutagePrediction {
    assert!(horizon > 0.0, "prediction horizon must be positive");
    let s = chain.failure_rate + chain.repair_rate;
    let outage_rate = if s == 0.0 {
        match chain.state {
            ChainState::Up => 0.0,
            ChainState::Down => 1.0,
        }
    } else {
        let down = chain.failure_rate / s;
        let x = s * horizon;
        let g = if x < 1e-12 { 1.0 } else { -(-x).exp_m1() / x };
        match chain.state {
            ChainState::Up => down * (1.0 - g),
            ChainState::Down => down + (1.0 - down) * g,
        }
    };
    OutagePrediction {
        outage_rate: outage_rate.clamp(0.0, 1.0),
        horizon,
        given: chain.state,
    }
}
