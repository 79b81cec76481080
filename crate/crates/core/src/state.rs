use serde::{Deserialize, Serialize};

/// Farms below this size leave the sector.
pub const MIN_ACTIVE_LAND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmerState {
    pub id: u32,
    /// Rented land [ha].
    pub land: f64,
    /// Pesticide application rate [kg/ha/yr].
    pub pesticide: f64,
    /// Pesticide use efficiency.
    pub efficiency: f64,
    /// Yield target [t/ha/yr].
    pub yield_target: f64,
    /// Yield realised in the last production phase [t/ha/yr].
    pub realized_yield: f64,
    /// Production costs of the last accounting phase [EUR/yr].
    pub costs: f64,
    /// Profit of the last accounting phase, subsidies included [EUR/yr].
    pub profit: f64,
    /// Realised return on investment `(1 - eta) * profit / costs`.
    pub roi: f64,
    pub active: bool,
}

impl FarmerState {
    pub fn output(&self) -> f64 {
        self.land * self.realized_yield
    }

    /// Removes the farmer from the sector and returns the land it held.
    pub fn exit(&mut self) -> f64 {
        let freed = self.land;
        self.land = 0.0;
        self.active = false;
        freed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    /// Goods price [EUR/t].
    pub price: f64,
    pub prev_price: f64,
    /// Price at initialisation, used for the degenerate-price floor.
    pub initial_price: f64,
    /// Demand [t/yr], constant over a run.
    pub demand: f64,
    pub total_production: f64,
    /// Land not rented by anyone [ha].
    pub leftover_land: f64,
    /// Set once the price formula had to be clamped at its floor.
    pub price_floor_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcologyState {
    /// Rescaled bird population, 1 at the start year.
    pub eps: f64,
    /// Pest exposure (pesticide-free yield loss fraction).
    pub pest: f64,
    /// Carrying capacity of the logistic biodiversity dynamics.
    pub carrying: f64,
    pub eps0: f64,
    /// Mean farm size at the start year [ha].
    pub lbar0: f64,
    /// Land-weighted pesticide aggregate at the start year, with the same
    /// efficiency exponent as the running aggregate [kg/ha/yr].
    pub pbar0_weighted: f64,
}

/// Farm size classes used in aggregate reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    /// Less than 20 ha.
    Small,
    /// 20 to 100 ha.
    Medium,
    /// More than 100 ha.
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];

    pub fn of(land: f64) -> SizeClass {
        if land < 20.0 {
            SizeClass::Small
        } else if land <= 100.0 {
            SizeClass::Medium
        } else {
            SizeClass::Large
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}
