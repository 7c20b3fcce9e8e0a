//! Closed-form outage rate against simulated downtime on a rate grid.
//!
//! Paths flip with the same per-tick probability `1 − e^{−λΔt}` as
//! `step_chain`, but the number of ticks until the next flip is drawn as one
//! geometric variate instead of one Bernoulli draw per tick. A smaller batch of
//! paths stepped tick by tick checks that the two samplers agree.

use island_core::availability::{predict_outage_rate, step_chain, AvailabilityChain, ChainState};
use rand::Rng;

use crate::common::{mean_se, rng};

pub const FAILURE_RATES: [f64; 3] = [1e-4, 5e-4, 1e-3];
pub const REPAIR_RATES: [f64; 3] = [5e-4, 1e-3, 2e-3];
const PERIOD_TICKS: u64 = 3600;
const DT: f64 = 1.0;
const PATHS: usize = 100_000;
const STEPPED_PATHS: usize = 20_000;

/// Fraction of the period's ticks that start in the down state.
fn geometric_path<R: Rng>(chain: &AvailabilityChain, rng: &mut R) -> f64 {
    let flip = |rate: f64| -(-rate * DT).exp_m1();
    let (p_fail, p_repair) = (flip(chain.failure_rate), flip(chain.repair_rate));
    let mut down = chain.is_down();
    let (mut t, mut down_ticks) = (0u64, 0u64);
    while t < PERIOD_TICKS {
        let p = if down { p_repair } else { p_fail };
        let run = if p == 0.0 {
            PERIOD_TICKS
        } else {
            // ticks spent in this state, the last one ending in the flip
            let u: f64 = rng.random();
            ((-u).ln_1p() / (-p).ln_1p()).floor() as u64 + 1
        };
        let run = run.min(PERIOD_TICKS - t);
        if down {
            down_ticks += run;
        }
        t += run;
        down = !down;
    }
    down_ticks as f64 / PERIOD_TICKS as f64
}

fn stepped_path<R: Rng>(chain: &AvailabilityChain, rng: &mut R) -> f64 {
    let mut c = chain.clone();
    let mut down_ticks = 0u64;
    for k in 0..PERIOD_TICKS {
        down_ticks += c.is_down() as u64;
        c = step_chain(&c, DT, (k + 1) as f64 * DT, rng);
    }
    down_ticks as f64 / PERIOD_TICKS as f64
}

pub struct GridPoint {
    pub chain: AvailabilityChain,
    pub predicted: f64,
    pub empirical: f64,
    pub se: f64,
}

impl GridPoint {
    pub fn z(&self) -> f64 {
        (self.predicted - self.empirical).abs() / self.se
    }
}

pub fn grid(seed: u64) -> Vec<GridPoint> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for &fail in &FAILURE_RATES {
        for &repair in &REPAIR_RATES {
            for state in [ChainState::Up, ChainState::Down] {
                let chain = AvailabilityChain::new(fail, repair, state);
                let samples: Vec<f64> = (0..PATHS).map(|_| geometric_path(&chain, &mut rng)).collect();
                let (empirical, se) = mean_se(&samples);
                out.push(GridPoint {
                    predicted: predict_outage_rate(&chain, PERIOD_TICKS as f64 * DT).outage_rate,
                    chain,
                    empirical,
                    se,
                });
            }
        }
    }
    out
}

pub fn run() -> Result<String, String> {
    let mut rng = rng(0x5eed_0002);
    let chain = AvailabilityChain::new(FAILURE_RATES[2], REPAIR_RATES[0], ChainState::Up);
    let a: Vec<f64> = (0..STEPPED_PATHS).map(|_| stepped_path(&chain, &mut rng)).collect();
    let b: Vec<f64> = (0..STEPPED_PATHS).map(|_| geometric_path(&chain, &mut rng)).collect();
    let ((ma, sa), (mb, sb)) = (mean_se(&a), mean_se(&b));
    let z_sampler = (ma - mb).abs() / sa.hypot(sb);
    if z_sampler > 3.0 {
        return Err(format!(
            "geometric sampler disagrees with step_chain: {mb} vs {ma} ({z_sampler:.2} se)"
        ));
    }

    let points = grid(0x5eed_0003);
    let worst = points.iter().map(GridPoint::z).fold(0.0, f64::max);
    let bad: Vec<String> = points
        .iter()
        .filter(|p| p.z() > 3.0)
        .map(|p| {
            format!(
                "λ_down {} λ_up {} from {:?}: {} vs {} ({:.2} se)",
                p.chain.failure_rate,
                p.chain.repair_rate,
                p.chain.state,
                p.predicted,
                p.empirical,
                p.z()
            )
        })
        .collect();
    if bad.is_empty() {
        Ok(format!(
            "{} grid points x {PATHS} paths, worst {worst:.2} se; sampler check {z_sampler:.2} se",
            points.len()
        ))
    } else {
        Err(bad.join("; "))
    }
}
