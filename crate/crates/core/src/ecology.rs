//! Biodiversity, carrying capacity and pest exposure.
//!
//! The bird index follows a discrete logistic map whose ceiling is set by mean
//! farm size and the land-weighted pesticide aggregate, each relative to its
//! start-year value. Pest exposure rises as the bird index falls.

use crate::error::{ModelError, Result};
use crate::params::ModelParams;
use crate::state::{EcologyState, FarmerState};

/// Upper bound on pest exposure; keeps zero-pesticide yields positive.
pub const MAX_PEST_EXPOSURE: f64 = 0.999;

/// `sum(L * P * e^k) / sum(L)` over active farmers. `k = 0` is the plain
/// land-weighted pesticide mean.
pub fn weighted_pesticide_mean(farmers: &[FarmerState], k: f64) -> Result<f64> {
    let mut land = 0.0;
    let mut weighted = 0.0;
    for f in farmers.iter().filter(|f| f.active) {
        let tech = if k == 0.0 { 1.0 } else { f.efficiency.powf(k) };
        land += f.land;
        weighted += f.land * f.pesticide * tech;
    }
    if land > 0.0 {
        Ok(weighted / land)
    } else {
        Err(ModelError::SectorCollapse)
    }
}

/// Mean land per active farmer.
pub fn mean_farm_size(farmers: &[FarmerState]) -> Result<f64> {
    let (n, land) = farmers
        .iter()
        .filter(|f| f.active)
        .fold((0usize, 0.0), |(n, l), f| (n + 1, l + f.land));
    if n > 0 && land > 0.0 {
        Ok(land / n as f64)
    } else {
        Err(ModelError::SectorCollapse)
    }
}

pub fn update_carrying(
    eco: &EcologyState,
    lbar_new: f64,
    pagg_new: f64,
    params: &ModelParams,
) -> f64 {
    debug_assert!(lbar_new > 0.0 && pagg_new > 0.0);
    params.mu * eco.lbar0 / lbar_new + (1.0 - params.mu) * eco.pbar0_weighted / pagg_new
}

pub fn update_biodiversity(eco: &EcologyState, carrying_next: f64, params: &ModelParams) -> f64 {
    let eps = eco.eps;
    let next = eps + params.r_eps * (1.0 - eps / carrying_next) * eps;
    next.max(params.eps_floor)
}

/// Pest exposure for the current (already updated) bird index.
pub fn update_pest(eco: &EcologyState, params: &ModelParams) -> f64 {
    let ratio = eco.eps0 / eco.eps.max(params.eps_floor);
    let pest = if params.a == 0.0 {
        params.pi0
    } else {
        params.pi0 * ratio.powf(params.a)
    };
    pest.clamp(f64::MIN_POSITIVE, MAX_PEST_EXPOSURE)
}

/// Start-year ecological state built from the initial population.
pub fn initial_ecology(farmers: &[FarmerState], params: &ModelParams) -> Result<EcologyState> {
    Ok(EcologyState {
        eps: 1.0,
        pest: params.pi0,
        carrying: 1.0,
        eps0: 1.0,
        lbar0: mean_farm_size(farmers)?,
        pbar0_weighted: weighted_pesticide_mean(farmers, params.k)?,
    })
}

/// End-of-year ecological update from the post-market, post-behaviour
/// population: aggregate, carrying capacity, bird index, pest exposure.
pub fn advance(
    eco: &EcologyState,
    farmers: &[FarmerState],
    params: &ModelParams,
) -> Result<EcologyState> {
    let pagg = weighted_pesticide_mean(farmers, params.k)?;
    let lbar = mean_farm_size(farmers)?;
    let mut next = eco.clone();
    // Zero aggregate pesticide would make the ceiling infinite; treat it as a
    // vanishingly small positive amount instead.
    next.carrying = update_carrying(eco, lbar, pagg.max(1e-12), params);
    next.eps = update_biodiversity(eco, next.carrying, params);
    next.pest = update_pest(&next, params);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn farmer(land: f64, pesticide: f64, efficiency: f64) -> FarmerState {
        FarmerState {
            id: 0,
            land,
            pesticide,
            efficiency,
            yield_target: 7.0,
            realized_yield: 7.0,
            costs: 0.0,
            profit: 0.0,
            roi: 0.0,
            active: true,
        }
    }

    fn eco(eps: f64) -> EcologyState {
        EcologyState {
            eps,
            pest: 0.3,
            carrying: 1.0,
            eps0: 1.0,
            lbar0: 33.0,
            pbar0_weighted: 5.0,
        }
    }

    #[test]
    fn uniform_population_mean() {
        let fs = vec![farmer(10.0, 5.0, 1.0); 4];
        for k in [0.0, 0.5, 1.0] {
            assert!((weighted_pesticide_mean(&fs, k).unwrap() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn land_weighting() {
        let fs = vec![farmer(1.0, 2.0, 1.3), farmer(3.0, 6.0, 0.7)];
        assert_eq!(weighted_pesticide_mean(&fs, 0.0).unwrap(), 5.0);
    }

    #[test]
    fn efficiency_exponent() {
        let fs = vec![farmer(1.0, 4.0, 2.0)];
        assert_eq!(weighted_pesticide_mean(&fs, 1.0).unwrap(), 8.0);
    }

    #[test]
    fn inactive_farmers_are_ignored_and_collapse_errors() {
        let mut fs = vec![farmer(1.0, 4.0, 2.0), farmer(3.0, 100.0, 1.0)];
        fs[1].active = false;
        assert_eq!(weighted_pesticide_mean(&fs, 0.0).unwrap(), 4.0);
        fs[0].active = false;
        assert!(matches!(
            weighted_pesticide_mean(&fs, 0.0),
            Err(ModelError::SectorCollapse)
        ));
        assert!(mean_farm_size(&fs).is_err());
    }

    #[test]
    fn carrying_capacity_values() {
        let p = ModelParams::default();
        let e = eco(1.0);
        assert!((update_carrying(&e, 33.0, 5.0, &p) - 1.0).abs() < 1e-12);
        assert!((update_carrying(&e, 66.0, 5.0, &p) - 0.55).abs() < 1e-12);
        assert!((update_carrying(&e, 33.0, 2.5, &p) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn logistic_values() {
        let p = ModelParams::default();
        assert_eq!(update_biodiversity(&eco(0.8), 0.8, &p), 0.8);
        assert!((update_biodiversity(&eco(0.5), 1.0, &p) - 0.525).abs() < 1e-12);
        assert!((update_biodiversity(&eco(1.2), 0.6, &p) - 0.9 * 1.2).abs() < 1e-12);
    }

    #[test]
    fn biodiversity_floor() {
        let p = ModelParams::default();
        let mut e = eco(1e-6);
        e.eps = 1e-6;
        assert!(update_biodiversity(&e, 1e-9, &p) >= p.eps_floor);
    }

    #[test]
    fn pest_exposure_values() {
        let mut p = ModelParams::default();
        assert_eq!(update_pest(&eco(1.0), &p), 0.3);
        assert!((update_pest(&eco(0.5625), &p) - 0.4).abs() < 1e-12);
        p.a = 0.0;
        assert_eq!(update_pest(&eco(0.01), &p), 0.3);
        p.a = 0.5;
        assert_eq!(update_pest(&eco(1e-6), &p), MAX_PEST_EXPOSURE);
    }

    #[test]
    fn exponent_paths_agree_at_unit_efficiency() {
        let fs: Vec<_> = (1..20)
            .map(|i| farmer(i as f64 * 3.0, 2.0 + (i % 5) as f64, 1.0))
            .collect();
        assert_eq!(
            weighted_pesticide_mean(&fs, 0.0).unwrap(),
            weighted_pesticide_mean(&fs, 1.0).unwrap()
        );
    }

    #[test]
    fn monotone_responses() {
        let p = ModelParams::default();
        let e = eco(1.0);
        assert!(update_carrying(&e, 33.0, 6.0, &p) < update_carrying(&e, 33.0, 5.0, &p));
        assert!(update_carrying(&e, 40.0, 5.0, &p) < update_carrying(&e, 33.0, 5.0, &p));
        assert!(update_pest(&eco(0.6), &p) > update_pest(&eco(0.7), &p));
    }

    proptest! {
        #[test]
        fn logistic_converges_monotonically_from_below(
            start in 0.001f64..1.0,
            k_frac in 0.0f64..1.0,
        ) {
            let p = ModelParams::default();
            let carrying = 0.2 + 1.8 * k_frac;
            let mut e = eco(start * carrying);
            let mut prev = e.eps;
            for _ in 0..2000 {
                e.eps = update_biodiversity(&e, carrying, &p);
                prop_assert!(e.eps >= prev);
                prop_assert!(e.eps <= carrying * (1.0 + 1e-12));
                prev = e.eps;
            }
            prop_assert!((e.eps - carrying).abs() < 1e-6 * carrying);
        }
    }
}
