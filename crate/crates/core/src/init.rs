//! Start-year population.
//!
//! Farm sizes are drawn from a size-class histogram (uniform within the chosen
//! class) and rescaled to the exact total land. Pesticide use and yield get
//! independent 10 % Gaussian dispersion around the sector averages, efficiency
//! follows from inverting the production function, and the price is the one at
//! which the mean return on investment equals the observed average.

use serde::{Deserialize, Serialize};

use crate::economy;
use crate::ecology;
use crate::error::{ModelError, Result};
use crate::params::ModelParams;
use crate::random::{RandomStream, Substream};
use crate::state::{EcologyState, FarmerState, MarketState};

/// Relative standard deviation of the initial pesticide and yield dispersion.
pub const INIT_DISPERSION: f64 = 0.1;

/// Smallest efficiency assigned at initialisation. Farmers whose drawn yield is
/// below the unprotected yield `y_max * (1 - pi0)` have no positive solution of
/// the inverted production function and get this value instead.
pub const EFFICIENCY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBin {
    /// Lower bound [ha], inclusive.
    pub low: f64,
    /// Upper bound [ha], exclusive.
    pub high: f64,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub bins: Vec<SizeBin>,
}

impl SizeHistogram {
    pub fn new(mut bins: Vec<SizeBin>) -> Result<Self> {
        bins.sort_by(|a, b| a.low.total_cmp(&b.low));
        let total: f64 = bins.iter().map(|b| b.count).sum();
        if bins.is_empty() || !(total > 0.0) {
            return Err(ModelError::InvalidHistogram(
                "farm counts must sum to a positive number".into(),
            ));
        }
        for b in &bins {
            if !(b.low >= 0.0 && b.high > b.low && b.high.is_finite()) {
                return Err(ModelError::InvalidHistogram(format!(
                    "size class [{}, {}) must be a finite positive interval",
                    b.low, b.high
                )));
            }
            if !(b.count >= 0.0) {
                return Err(ModelError::InvalidHistogram(format!(
                    "negative farm count in class [{}, {})",
                    b.low, b.high
                )));
            }
        }
        for pair in bins.windows(2) {
            if pair[1].low < pair[0].high {
                return Err(ModelError::InvalidHistogram(format!(
                    "size classes [{}, {}) and [{}, {}) overlap",
                    pair[0].low, pair[0].high, pair[1].low, pair[1].high
                )));
            }
        }
        Ok(SizeHistogram { bins })
    }

    pub fn total_count(&self) -> f64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Land implied by putting every farm at its class midpoint [ha].
    pub fn midpoint_land(&self) -> f64 {
        self.bins
            .iter()
            .map(|b| b.count * 0.5 * (b.low + b.high))
            .sum()
    }

    fn sample(&self, stream: &mut RandomStream) -> f64 {
        let total = self.total_count();
        let mut u = stream.uniform(Substream::InitLand) * total;
        let mut chosen = self.bins.last().expect("non-empty histogram");
        for b in &self.bins {
            if u < b.count {
                chosen = b;
                break;
            }
            u -= b.count;
        }
        chosen.low + (chosen.high - chosen.low) * stream.uniform(Substream::InitLand)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub farmers: Vec<FarmerState>,
    pub market: MarketState,
    pub ecology: EcologyState,
}

/// Efficiency at which the noise-free production function returns `y`.
pub fn invert_efficiency(y: f64, pesticide: f64, params: &ModelParams) -> f64 {
    -(params.p_ref_pesticide / pesticide) * ((1.0 - y / params.y_max) / params.pi0).ln()
}

/// Positive multiplicative draw `mean * (1 + sd * z)`, redrawn until it
/// satisfies `accept`.
fn dispersed(
    mean: f64,
    stream: &mut RandomStream,
    which: Substream,
    accept: impl Fn(f64) -> bool,
) -> f64 {
    loop {
        let v = mean * (1.0 + INIT_DISPERSION * stream.standard_normal(which));
        if v > 0.0 && accept(v) {
            return v;
        }
    }
}

/// Price at which the unweighted mean return on investment equals `r0`.
/// Returns are linear in price, so the solution is closed form.
pub fn equilibrium_price(farmers: &[FarmerState], total_land: f64, params: &ModelParams) -> f64 {
    let n = farmers.len() as f64;
    let mut slope = 0.0;
    let mut intercept = 0.0;
    for f in farmers {
        let c = f.costs;
        let s = f.land / total_land * params.s_total;
        slope += f.output() / c;
        intercept += (s - c) / c;
    }
    (params.r0 / (1.0 - params.eta) - intercept / n) / (slope / n)
}

pub fn initialize_population(
    params: &ModelParams,
    histogram: &SizeHistogram,
    stream: &mut RandomStream,
) -> Result<Population> {
    params.validate()?;

    let mut lands: Vec<f64> = (0..params.n0).map(|_| histogram.sample(stream)).collect();
    let drawn: f64 = lands.iter().sum();
    if !(drawn > 0.0) {
        return Err(ModelError::InvalidHistogram(
            "sampled farms have no land".into(),
        ));
    }
    let scale = params.l0_total / drawn;
    for l in &mut lands {
        *l *= scale;
    }

    let mut farmers = Vec::with_capacity(params.n0);
    for (id, land) in lands.into_iter().enumerate() {
        let pesticide = dispersed(params.p_bar0, stream, Substream::InitPesticide, |_| true);
        let y = dispersed(params.y_bar0, stream, Substream::InitYield, |y| {
            y < params.y_max
        });
        let efficiency = invert_efficiency(y, pesticide, params).max(EFFICIENCY_FLOOR);
        farmers.push(FarmerState {
            id: id as u32,
            land,
            pesticide,
            efficiency,
            yield_target: y,
            realized_yield: y,
            costs: economy::total_costs(land, pesticide, params),
            profit: 0.0,
            roi: 0.0,
            active: true,
        });
    }

    let total_land: f64 = farmers.iter().map(|f| f.land).sum();
    let price = equilibrium_price(&farmers, total_land, params);
    if !(price > 0.0) || !price.is_finite() {
        return Err(ModelError::NonPositiveInitialPrice(price));
    }
    for f in &mut farmers {
        let subsidy = f.land / total_land * params.s_total;
        f.profit = price * f.output() - f.costs + subsidy;
        f.roi = economy::return_on_investment(f.profit, f.costs, params);
    }

    let production: f64 = farmers.iter().map(|f| f.output()).sum();
    let market = MarketState {
        price,
        prev_price: price,
        initial_price: price,
        demand: production,
        total_production: production,
        leftover_land: 0.0,
        price_floor_hit: false,
    };
    let ecology = ecology::initial_ecology(&farmers, params)?;

    Ok(Population {
        farmers,
        market,
        ecology,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::yield_per_hectare;

    fn histogram() -> SizeHistogram {
        SizeHistogram::new(vec![
            SizeBin { low: 1.0, high: 20.0, count: 100.0 },
            SizeBin { low: 20.0, high: 100.0, count: 150.0 },
            SizeBin { low: 100.0, high: 300.0, count: 20.0 },
        ])
        .unwrap()
    }

    fn small_params(n0: usize) -> ModelParams {
        ModelParams::default().scaled(n0 as f64 / 300_000.0)
    }

    #[test]
    fn inversion_boundary_gives_zero_efficiency() {
        let p = ModelParams::default();
        let y = p.y_max * (1.0 - p.pi0);
        assert!(invert_efficiency(y, 5.0, &p).abs() < 1e-12);
    }

    #[test]
    fn inversion_at_sector_averages() {
        let p = ModelParams::default();
        let e = invert_efficiency(7.0, 5.0, &p);
        let expected = -2.0 * ((1.0 - 7.0 / 8.5) / 0.3f64).ln();
        assert!((e - expected).abs() < 1e-12);
        assert!((e - 1.061).abs() < 1e-3);
        assert!((yield_per_hectare(e, 5.0, p.pi0, &p, 0.0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_histograms() {
        assert!(SizeHistogram::new(vec![]).is_err());
        assert!(SizeHistogram::new(vec![SizeBin { low: 5.0, high: 1.0, count: 3.0 }]).is_err());
        assert!(SizeHistogram::new(vec![
            SizeBin { low: 0.0, high: 10.0, count: 3.0 },
            SizeBin { low: 5.0, high: 20.0, count: 3.0 },
        ])
        .is_err());
        assert!(SizeHistogram::new(vec![SizeBin { low: 0.0, high: 10.0, count: 0.0 }]).is_err());
    }

    #[test]
    fn population_is_consistent() {
        let p = small_params(20_000);
        let pop = initialize_population(&p, &histogram(), &mut RandomStream::new(5)).unwrap();
        assert_eq!(pop.farmers.len(), p.n0);

        let land: f64 = pop.farmers.iter().map(|f| f.land).sum();
        assert!((land - p.l0_total).abs() <= 1e-9 * p.l0_total);

        let mean_p = pop.farmers.iter().map(|f| f.pesticide).sum::<f64>() / p.n0 as f64;
        assert!((mean_p / p.p_bar0 - 1.0).abs() < 0.01);

        let mean_roi = pop.farmers.iter().map(|f| f.roi).sum::<f64>() / p.n0 as f64;
        assert!((mean_roi - p.r0).abs() < 1e-9);

        let production: f64 = pop.farmers.iter().map(|f| f.output()).sum();
        assert_eq!(pop.market.demand, production);
        assert!((pop.market.demand / (p.l0_total * p.y_bar0) - 1.0).abs() < 0.05);

        assert_eq!(pop.ecology.eps, 1.0);
        assert_eq!(pop.ecology.pest, p.pi0);
        assert_eq!(pop.ecology.carrying, 1.0);
        assert!((pop.ecology.lbar0 - p.l0_total / p.n0 as f64).abs() < 1e-9);

        for f in &pop.farmers {
            assert!(f.active && f.pesticide > 0.0 && f.efficiency > 0.0);
            assert!(f.yield_target > 0.0 && f.yield_target < p.y_max);
            assert_eq!(f.yield_target, f.realized_yield);
        }
    }

    #[test]
    fn efficiency_reproduces_drawn_yield() {
        let p = small_params(2_000);
        let pop = initialize_population(&p, &histogram(), &mut RandomStream::new(9)).unwrap();
        for f in pop.farmers.iter().filter(|f| f.efficiency > EFFICIENCY_FLOOR) {
            let y = yield_per_hectare(f.efficiency, f.pesticide, p.pi0, &p, 0.0);
            assert!((y - f.yield_target).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let p = small_params(3_000);
        let a = initialize_population(&p, &histogram(), &mut RandomStream::new(77)).unwrap();
        let b = initialize_population(&p, &histogram(), &mut RandomStream::new(77)).unwrap();
        assert_eq!(a, b);
        let c = initialize_population(&p, &histogram(), &mut RandomStream::new(78)).unwrap();
        assert_ne!(a.farmers, c.farmers);
    }

    #[test]
    fn non_positive_price_is_fatal() {
        let mut p = small_params(500);
        // Subsidies alone return far more than r0 on costs.
        p.s_total *= 100.0;
        assert!(matches!(
            initialize_population(&p, &histogram(), &mut RandomStream::new(1)),
            Err(ModelError::NonPositiveInitialPrice(_))
        ));
    }
}
