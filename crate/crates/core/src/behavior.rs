//! Heuristic pesticide and yield-target adjustment.

use crate::params::ModelParams;
use crate::state::FarmerState;

/// Moves the pesticide rate towards closing the gap between yield target and
/// realised yield, then applies the optional regulatory cap. A zero realised
/// yield skips the behavioural step for the year.
pub fn update_pesticide(farmer: &FarmerState, params: &ModelParams, cap: Option<f64>) -> f64 {
    let y = farmer.realized_yield;
    let behavioural = if y > 0.0 {
        let gap = (farmer.yield_target - y) / y;
        (farmer.pesticide * (1.0 + params.gamma * gap)).max(0.0)
    } else {
        farmer.pesticide
    };
    match cap {
        Some(c) => behavioural.min(c.max(0.0)),
        None => behavioural,
    }
}

/// Yield target follows the relative price change, bounded by `y_max`.
pub fn update_yield_target(
    farmer: &FarmerState,
    price: f64,
    prev_price: f64,
    params: &ModelParams,
) -> f64 {
    debug_assert!(price > 0.0);
    let target = farmer.yield_target * (1.0 + params.lambda * (price - prev_price) / price);
    if target > 0.0 {
        target.min(params.y_max)
    } else {
        // Only reachable with a price drop larger than 1/lambda; keep the target
        // strictly positive so the pesticide rule stays defined.
        f64::MIN_POSITIVE.max(farmer.yield_target * 1e-6)
    }
}
