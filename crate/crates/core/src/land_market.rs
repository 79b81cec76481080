//! Centralised yearly land rental market.
//!
//! All releases are decided on the same beginning-of-phase returns, pooled with
//! last year's leftover land, and then shared out among the acquirers in
//! proportion to their demand. Farms that shrink below [`MIN_ACTIVE_LAND`]
//! hand everything back and leave.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::params::{ModelParams, RationingRule};
use crate::state::{FarmerState, MarketState, MIN_ACTIVE_LAND};

/// Land released by a farmer whose return falls short of the opportunity cost.
/// Zero for farmers at or above `r_ref`.
pub fn compute_release(farmer: &FarmerState, params: &ModelParams) -> f64 {
    let r = farmer.roi;
    if !farmer.active || r >= params.r_ref {
        return 0.0;
    }
    params.beta / (1.0 + params.r_ref / (params.r_ref - r)) * farmer.land
}

/// Land a farmer beating the opportunity cost would like to add.
/// Zero for farmers at or below `r_ref`.
pub fn compute_demand(farmer: &FarmerState, params: &ModelParams) -> f64 {
    let r = farmer.roi;
    if !farmer.active || r <= params.r_ref {
        return 0.0;
    }
    params.beta / (1.0 + params.r_ref / (r - params.r_ref)) * farmer.land
}

/// Share of each prospective acquisition that is granted.
pub fn rationing_factor(available: f64, demanded: f64, rule: RationingRule) -> f64 {
    if demanded <= 0.0 {
        return 1.0;
    }
    match rule {
        RationingRule::Feasible => (available / demanded).min(1.0),
        RationingRule::PrintedRatio => {
            if available <= 0.0 {
                1.0
            } else {
                (demanded / available).min(1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub released: f64,
    pub demanded: f64,
    pub acquired: f64,
    /// Leftover from last year plus this year's releases.
    pub available: f64,
    pub rationing: f64,
    /// Ids of the farmers that left the sector in this settlement.
    pub exits: Vec<u32>,
}

/// Runs one round of the rental market over `farmers`, updating their land,
/// exit status and the leftover pool in `market`.
pub fn settle_market(
    farmers: &mut [FarmerState],
    market: &mut MarketState,
    params: &ModelParams,
) -> Result<Settlement> {
    debug_assert!(market.leftover_land >= 0.0);
    let n = farmers.len();
    let mut releases = vec![0.0; n];
    let mut demands = vec![0.0; n];
    for (i, f) in farmers.iter().enumerate() {
        releases[i] = compute_release(f, params);
        demands[i] = compute_demand(f, params);
    }

    let mut released = 0.0;
    for (f, &l) in farmers.iter_mut().zip(&releases) {
        if l > 0.0 {
            f.land -= l;
            released += l;
        }
    }
    let demanded: f64 = demands.iter().sum();
    let available = market.leftover_land + released;
    let phi = rationing_factor(available, demanded, params.rationing);

    let mut acquired = 0.0;
    for (f, &d) in farmers.iter_mut().zip(&demands) {
        if d > 0.0 {
            let got = phi * d;
            f.land += got;
            acquired += got;
        }
    }

    let mut leftover = available - acquired;
    if leftover < 0.0 {
        // Proportional rationing hands out exactly `available` when binding;
        // anything beyond rounding means the rule over-allocated.
        if leftover > -1e-9 * available.max(1.0) {
            leftover = 0.0;
        } else {
            return Err(ModelError::NegativeLeftover(leftover));
        }
    }

    let mut exits = Vec::new();
    for f in farmers.iter_mut() {
        if f.active && f.land < MIN_ACTIVE_LAND {
            leftover += f.exit();
            exits.push(f.id);
        }
    }
    market.leftover_land = leftover;

    Ok(Settlement {
        released,
        demanded,
        acquired,
        available,
        rationing: phi,
        exits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn farmer(id: u32, land: f64, roi: f64) -> FarmerState {
        FarmerState {
            id,
            land,
            pesticide: 5.0,
            efficiency: 1.0,
            yield_target: 7.0,
            realized_yield: 7.0,
            costs: 1.0,
            profit: 0.0,
            roi,
            active: true,
        }
    }

    fn market(leftover: f64) -> MarketState {
        MarketState {
            price: 100.0,
            prev_price: 100.0,
            initial_price: 100.0,
            demand: 1.0,
            total_production: 1.0,
            leftover_land: leftover,
            price_floor_hit: false,
        }
    }

    #[test]
    fn release_formula() {
        let p = ModelParams::default();
        let f = farmer(0, 100.0, 0.0);
        assert!((compute_release(&f, &p) - 22.5).abs() < 1e-12);
        let near = farmer(0, 100.0, p.r_ref - 1e-12);
        assert!(compute_release(&near, &p) < 1e-8);
        let ruined = farmer(0, 100.0, -1e9);
        assert!((compute_release(&ruined, &p) - 45.0).abs() < 1e-6);
        assert!(compute_release(&ruined, &p) < 45.0);
    }

    #[test]
    fn demand_formula() {
        let p = ModelParams::default();
        let f = farmer(0, 100.0, 0.10);
        assert!((compute_demand(&f, &p) - 22.5).abs() < 1e-12);
        let near = farmer(0, 100.0, p.r_ref + 1e-12);
        assert!(compute_demand(&near, &p) < 1e-8);
        let booming = farmer(0, 100.0, 1e9);
        assert!((compute_demand(&booming, &p) - 45.0).abs() < 1e-6);
    }

    #[test]
    fn indifferent_farmer_neither_releases_nor_acquires() {
        let p = ModelParams::default();
        let f = farmer(0, 10.0, p.r_ref);
        assert_eq!(compute_release(&f, &p), 0.0);
        assert_eq!(compute_demand(&f, &p), 0.0);
    }

    #[test]
    fn no_trade_leaves_everything_unchanged() {
        let p = ModelParams::default();
        let mut fs = vec![farmer(0, 10.0, p.r_ref), farmer(1, 30.0, p.r_ref)];
        let mut m = market(5.0);
        let s = settle_market(&mut fs, &mut m, &p).unwrap();
        assert_eq!(m.leftover_land, 5.0);
        assert_eq!(fs[0].land, 10.0);
        assert_eq!(fs[1].land, 30.0);
        assert!(s.exits.is_empty());
    }

    #[test]
    fn proportional_rationing() {
        assert_eq!(rationing_factor(100.0, 400.0, RationingRule::Feasible), 0.25);
        assert_eq!(rationing_factor(500.0, 400.0, RationingRule::Feasible), 1.0);
        assert_eq!(rationing_factor(100.0, 400.0, RationingRule::PrintedRatio), 1.0);
        assert_eq!(rationing_factor(500.0, 400.0, RationingRule::PrintedRatio), 0.8);

        // A farmer demanding 40 ha out of 400 ha total demand with 100 ha
        // available receives 10 ha.
        let p = ModelParams::default();
        // roi = 0.10 gives demand = 0.225 L, so L = 40 / 0.225.
        let l_small = 40.0 / 0.225;
        let l_big = 360.0 / 0.225;
        let mut fs = vec![farmer(0, l_small, 0.10), farmer(1, l_big, 0.10)];
        let mut m = market(100.0);
        let s = settle_market(&mut fs, &mut m, &p).unwrap();
        assert!((s.demanded - 400.0).abs() < 1e-9);
        assert!((s.rationing - 0.25).abs() < 1e-12);
        assert!((fs[0].land - l_small - 10.0).abs() < 1e-9);
        assert!(m.leftover_land.abs() < 1e-9);
    }

    #[test]
    fn printed_ratio_overallocates_and_aborts() {
        let mut p = ModelParams::default();
        p.rationing = RationingRule::PrintedRatio;
        let mut fs = vec![farmer(0, 1000.0, 0.10)];
        let mut m = market(10.0);
        assert!(matches!(
            settle_market(&mut fs, &mut m, &p),
            Err(ModelError::NegativeLeftover(_))
        ));
    }

    #[test]
    fn small_farm_exits() {
        let p = ModelParams::default();
        // roi = 0 releases 22.5 %, leaving 0.09 ha.
        let start = 0.09 / (1.0 - 0.225);
        let mut fs = vec![farmer(0, start, 0.0), farmer(1, 50.0, p.r_ref)];
        let mut m = market(0.0);
        let s = settle_market(&mut fs, &mut m, &p).unwrap();
        assert_eq!(s.exits, vec![0]);
        assert!(!fs[0].active);
        assert_eq!(fs[0].land, 0.0);
        assert!((m.leftover_land - start).abs() < 1e-12);
        assert!((m.leftover_land - s.released - 0.09).abs() < 1e-12);
    }

    #[test]
    fn inactive_farmers_do_not_trade() {
        let p = ModelParams::default();
        let mut ghost = farmer(0, 0.0, 1.0);
        ghost.active = false;
        let mut fs = vec![ghost, farmer(1, 50.0, 0.2)];
        let mut m = market(100.0);
        settle_market(&mut fs, &mut m, &p).unwrap();
        assert_eq!(fs[0].land, 0.0);
        assert!(!fs[0].active);
    }

    proptest! {
        #[test]
        fn conservation_and_feasibility(
            lands in prop::collection::vec(0.05f64..500.0, 1..60),
            rois in prop::collection::vec(-0.5f64..0.6, 60),
            leftover in 0.0f64..200.0,
        ) {
            let p = ModelParams::default();
            let mut fs: Vec<FarmerState> = lands
                .iter()
                .zip(&rois)
                .enumerate()
                .map(|(i, (&l, &r))| farmer(i as u32, l, r))
                .collect();
            let before: f64 = lands.iter().sum::<f64>() + leftover;
            let mut m = market(leftover);
            let s = settle_market(&mut fs, &mut m, &p).unwrap();
            let after: f64 = fs.iter().map(|f| f.land).sum::<f64>() + m.leftover_land;
            prop_assert!((after - before).abs() <= 1e-9 * before);
            prop_assert!(s.acquired <= s.available * (1.0 + 1e-12));
            prop_assert!(m.leftover_land >= 0.0);
            for f in &fs {
                prop_assert!(!f.active || f.land >= MIN_ACTIVE_LAND);
                prop_assert!(f.active || f.land == 0.0);
            }
        }
    }
}
