use island_core::availability::{predict_outage_rate, AvailabilityChain, ChainState};
use proptest::prelude::*;

use super::{check, Property};
use crate::predictor;

pub fn properties() -> Vec<Property> {
    vec![
        ("p_o non-decreasing in λ_down", monotone_in_failure),
        ("p_o non-increasing in λ_up", monotone_in_repair),
        ("p_o from down is at least p_o from up", down_dominates_up),
        ("p_o approaches π_d for long horizons", long_horizon),
        ("closed form within 3 se of simulated downtime", against_paths),
    ]
}

fn rate() -> impl Strategy<Value = f64> {
    (-7.0..-1.0f64).prop_map(|e| 10f64.powf(e))
}

fn state() -> impl Strategy<Value = ChainState> {
    prop_oneof![Just(ChainState::Up), Just(ChainState::Down)]
}

fn p_o(fail: f64, repair: f64, state: ChainState, horizon: f64) -> f64 {
    predict_outage_rate(&AvailabilityChain::new(fail, repair, state), horizon).outage_rate
}

fn monotone_in_failure() -> Result<String, String> {
    check(
        (rate(), rate(), rate(), state(), 1.0..1e6f64),
        |(a, b, repair, s, t)| {
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(p_o(lo, repair, s, t) <= p_o(hi, repair, s, t));
            Ok(())
        },
    )
}

fn monotone_in_repair() -> Result<String, String> {
    check((rate(), rate(), rate(), state(), 1.0..1e6f64), |(fail, a, b, s, t)| {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(p_o(fail, lo, s, t) >= p_o(fail, hi, s, t));
        Ok(())
    })
}

fn down_dominates_up() -> Result<String, String> {
    check((rate(), rate(), 1.0..1e7f64), |(fail, repair, t)| {
        prop_assert!(p_o(fail, repair, ChainState::Down, t) >= p_o(fail, repair, ChainState::Up, t));
        Ok(())
    })
}

fn long_horizon() -> Result<String, String> {
    check((rate(), rate(), state()), |(fail, repair, s)| {
        let t = 100.0 / (fail + repair);
        let pi_d = fail / (fail + repair);
        prop_assert!((p_o(fail, repair, s, t) - pi_d).abs() <= 0.01);
        Ok(())
    })
}

fn against_paths() -> Result<String, String> {
    let points = predictor::grid(0x5eed_0007);
    let worst = points.iter().map(predictor::GridPoint::z).fold(0.0, f64::max);
    let detail = format!("{} grid points, worst {worst:.2} se", points.len());
    if worst <= 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}
