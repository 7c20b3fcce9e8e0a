//! Outage-time quadrature against a direct Monte-Carlo evaluation of the
//! double integral.

use island_core::estimator::expected_outage_time;
use rand::Rng;

use crate::common::{rng, Family};

const SETTINGS: usize = 20;
const SAMPLES: usize = 1_000_000;
const BINS: usize = 60;
const TOLERANCE: f64 = 0.02;

fn arrival_family<R: Rng>(rng: &mut R, period: f64) -> Family {
    match rng.random_range(0..4) {
        0 => Family::Atom(rng.random_range(0.0..0.7) * period),
        1 => Family::Uniform(rng.random_range(0.3..1.5) * period),
        2 => Family::Exponential(rng.random_range(0.1..0.8) * period),
        _ => Family::Weibull {
            shape: rng.random_range(1.2..3.0),
            scale: rng.random_range(0.2..0.8) * period,
        },
    }
}

fn stay_family<R: Rng>(rng: &mut R, period: f64) -> Family {
    match rng.random_range(0..3) {
        0 => Family::Uniform(rng.random_range(0.2..1.2) * period),
        1 => Family::Exponential(rng.random_range(0.1..0.6) * period),
        _ => Family::Weibull {
            shape: rng.random_range(1.2..3.0),
            scale: rng.random_range(0.1..0.6) * period,
        },
    }
}

/// `E[τ · 1{t ≤ T, τ ≤ T − t}]` and its standard error.
fn monte_carlo<R: Rng>(arrival: &Family, stay: &Family, period: f64, rng: &mut R) -> (f64, f64) {
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..SAMPLES {
        let t = arrival.quantile(rng.random());
        let tau = stay.quantile(rng.random());
        if t <= period && tau <= period - t {
            sum += tau;
            sq += tau * tau;
        }
    }
    let n = SAMPLES as f64;
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / (n - 1.0)).sqrt())
}

pub fn run() -> Result<String, String> {
    let mut rng = rng(0x5eed_0001);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for case in 0..SETTINGS {
        let period = rng.random_range(600.0..7200.0);
        let arrival = arrival_family(&mut rng, period);
        let stay = stay_family(&mut rng, period);
        let p_o = rng.random_range(0.01..1.0);
        let duty = rng.random_range(0.05..=1.0);
        let width = period / BINS as f64;
        let value = expected_outage_time(
            p_o,
            duty,
            &arrival.discretize(width, BINS),
            &stay.discretize(width, BINS),
            period,
        )
        .map_err(|e| format!("setting {case}: {e}"))?;
        let (mc, se) = monte_carlo(&arrival, &stay, period, &mut rng);
        let oracle = p_o * duty * mc;
        let rel = (value / oracle - 1.0).abs();
        worst = worst.max(rel);
        if rel > TOLERANCE {
            failures.push(format!(
                "setting {case} ({arrival:?} / {stay:?}, T = {period:.0}): {value} vs {oracle} (mc rel se {:.4})",
                se / mc
            ));
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "{SETTINGS} settings, worst relative error {worst:.4} (limit {TOLERANCE})"
        ))
    } else {
        Err(failures.join("; "))
    }
}
