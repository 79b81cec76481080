//! Production, goods market clearing, profit accounting and technology adoption.

use serde::{Deserialize, Serialize};

use crate::params::ModelParams;
use crate::policy::SubsidyTerms;
use crate::random::{RandomStream, Substream};
use crate::state::{FarmerState, MarketState};

/// Relative price floor applied when the price update would turn non-positive.
pub const PRICE_FLOOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProfitBreakdown {
    pub revenue: f64,
    pub op_costs: f64,
    pub pesticide_costs: f64,
    pub nonop_costs: f64,
    pub subsidy: f64,
    pub profit: f64,
}

impl ProfitBreakdown {
    pub fn total_costs(&self) -> f64 {
        self.op_costs + self.pesticide_costs + self.nonop_costs
    }
}

/// Saturating (Mitscherlich-Baule) yield response with multiplicative noise `xi`.
/// Never negative.
pub fn yield_per_hectare(
    efficiency: f64,
    pesticide: f64,
    pest: f64,
    params: &ModelParams,
    xi: f64,
) -> f64 {
    let protected = 1.0 - pest * (-efficiency * pesticide / params.p_ref_pesticide).exp();
    (params.y_max * protected * (1.0 + xi)).max(0.0)
}

/// Harvest of one farmer. Updates `realized_yield` and returns `(yield, output)`.
pub fn produce(
    farmer: &mut FarmerState,
    pest: f64,
    params: &ModelParams,
    stream: &mut RandomStream,
) -> (f64, f64) {
    debug_assert!(farmer.active);
    let xi = params.xi_std * stream.standard_normal(Substream::Production);
    let y = yield_per_hectare(farmer.efficiency, farmer.pesticide, pest, params, xi);
    farmer.realized_yield = y;
    (y, farmer.land * y)
}

/// Price adjustment towards the supply/demand balance.
pub fn clear_market(total_production: f64, market: &MarketState, params: &ModelParams) -> MarketState {
    let mut next = market.clone();
    let excess = (market.demand - total_production) / market.demand;
    let mut price = market.price * (1.0 + params.alpha * excess);
    if !(price > 0.0) {
        price = PRICE_FLOOR_FRACTION * market.initial_price;
        next.price_floor_hit = true;
    }
    next.prev_price = market.price;
    next.price = price;
    next.total_production = total_production;
    next
}

/// Operational, pesticide and scale-dependent non-operational costs.
pub fn production_costs(land: f64, pesticide: f64, params: &ModelParams) -> (f64, f64, f64) {
    let op = land * params.c_op;
    let pest = land * params.p_pesticide * pesticide;
    let nonop = land.powf(params.b) * params.c_nonop;
    (op, pest, nonop)
}

pub fn total_costs(land: f64, pesticide: f64, params: &ModelParams) -> f64 {
    let (op, pest, nonop) = production_costs(land, pesticide, params);
    op + pest + nonop
}

/// Return on investment net of the technology share.
pub fn return_on_investment(profit: f64, costs: f64, params: &ModelParams) -> f64 {
    (1.0 - params.eta) * profit / costs
}

/// Profit of one farmer for the year. `total_land` is the land held by active
/// farmers (the leftover pool is not subsidised). Updates `costs`, `profit` and
/// `roi` on the farmer.
pub fn account_profit(
    farmer: &mut FarmerState,
    price: f64,
    total_land: f64,
    params: &ModelParams,
    subsidy: &SubsidyTerms,
    n_active: usize,
) -> ProfitBreakdown {
    debug_assert!(total_land > 0.0 && n_active > 0);
    let (op_costs, pesticide_costs, nonop_costs) =
        production_costs(farmer.land, farmer.pesticide, params);
    let revenue = price * farmer.output();
    let subsidy = subsidy.for_farmer(farmer.land, total_land, n_active);
    let costs = op_costs + pesticide_costs + nonop_costs;
    let profit = revenue - costs + subsidy;
    farmer.costs = costs;
    farmer.profit = profit;
    farmer.roi = return_on_investment(profit, costs, params);
    ProfitBreakdown {
        revenue,
        op_costs,
        pesticide_costs,
        nonop_costs,
        subsidy,
        profit,
    }
}

/// Probability that the technology investment succeeds. Zero without profit.
pub fn adoption_probability(profit: f64, params: &ModelParams) -> f64 {
    if profit <= 0.0 {
        0.0
    } else {
        1.0 - (-params.eta * profit / params.profit_ref).exp()
    }
}

/// Bernoulli adoption trial. On success the efficiency grows by a uniform
/// increment in `[0, upsilon_max]`. Returns the new efficiency.
///
/// Both draws are taken for every active farmer, successful or not.
pub fn adopt_technology(
    farmer: &mut FarmerState,
    params: &ModelParams,
    stream: &mut RandomStream,
) -> f64 {
    let p = adoption_probability(farmer.profit, params);
    let success = stream.bernoulli(Substream::Adoption, p);
    let gain = params.upsilon_max * stream.uniform(Substream::EfficiencyGain);
    if success {
        farmer.efficiency += gain;
    }
    farmer.efficiency
}
