//! Yearly simulation loop and Monte Carlo replicas.
//!
//! A year runs production, market clearing and accounting, technology adoption,
//! land market settlement, behavioural updates and finally the ecological
//! update. Every reduction runs sequentially in farmer id order, so a replica
//! is bit-reproducible for a given seed; replicas run in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior;
use crate::ecology;
use crate::economy;
use crate::error::{ModelError, Result};
use crate::init::{initialize_population, SizeHistogram};
use crate::land_market;
use crate::params::ModelParams;
use crate::policy::{pesticide_cap, subsidy_terms, ScenarioConfig};
use crate::random::RandomStream;
use crate::state::{EcologyState, FarmerState, MarketState, SizeClass};

macro_rules! year_frame {
    ($( $(#[$doc:meta])* $field:ident ),* $(,)?) => {
        /// Aggregate record of one simulated year.
        ///
        /// State variables (biodiversity, pest exposure, land holdings, leftover
        /// pool, pesticide rates) are the values in force during the year; flows
        /// (production, price, profits, land traded) are the outcomes of the
        /// year. Empty size classes report `NaN` for their mean return.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct YearFrame {
            pub year: i32,
            $( $(#[$doc])* pub $field: f64, )*
        }

        impl YearFrame {
            pub const FIELDS: &'static [&'static str] = &[$( stringify!($field) ),*];

            pub fn values(&self) -> Vec<f64> {
                vec![$( self.$field ),*]
            }

            pub fn from_values(year: i32, values: &[f64]) -> YearFrame {
                let mut it = values.iter().copied();
                YearFrame {
                    year,
                    $( $field: it.next().expect("one value per field"), )*
                }
            }

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    "year" => Some(self.year as f64),
                    $( stringify!($field) => Some(self.$field), )*
                    _ => None,
                }
            }
        }
    };
}

year_frame! {
    eps,
    pest,
    carrying,
    price,
    total_production,
    demand,
    n_active,
    mean_farm_size,
    /// Land-weighted mean pesticide rate [kg/ha/yr].
    weighted_pesticide_mean,
    /// Production per utilised hectare [t/ha].
    mean_yield,
    mean_efficiency,
    /// Mean efficiency over every start-year farmer; exited farmers keep the
    /// value they had when leaving.
    cohort_efficiency,
    /// Mean efficiency increment per active farmer during the year.
    efficiency_gain,
    mean_roi,
    mean_roi_small,
    mean_roi_medium,
    mean_roi_large,
    leftover_land,
    land_small,
    land_medium,
    land_large,
    farms_small,
    farms_medium,
    farms_large,
    /// Flat per-farmer payment (coupon or reallocated share) [EUR].
    subsidy_per_farmer,
    /// Land-proportional payment per utilised hectare [EUR/ha].
    subsidy_per_hectare,
    total_subsidy,
    land_released,
    land_acquired,
    land_available,
    exits,
}

impl YearFrame {
    pub fn land_by_size_class(&self) -> [f64; 3] {
        [self.land_small, self.land_medium, self.land_large]
    }
}

/// One replica: a single seeded trajectory.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    scenario: ScenarioConfig,
    farmers: Vec<FarmerState>,
    market: MarketState,
    ecology: EcologyState,
    stream: RandomStream,
    year: i32,
    /// Pesticide rates of the pre-ramp year, indexed by farmer id.
    pre_ramp_pesticide: Option<Vec<f64>>,
    collapsed: bool,
}

impl Simulation {
    /// Builds the start-year population. Variant overrides of the scenario are
    /// applied to `params` first.
    pub fn new(
        params: &ModelParams,
        scenario: &ScenarioConfig,
        histogram: &SizeHistogram,
        seed: u64,
    ) -> Result<Self> {
        scenario.validate()?;
        let params = scenario.apply_to(params);
        let mut stream = RandomStream::new(seed);
        let pop = initialize_population(&params, histogram, &mut stream)?;
        Ok(Simulation {
            year: params.start_year,
            params,
            scenario: scenario.clone(),
            farmers: pop.farmers,
            market: pop.market,
            ecology: pop.ecology,
            stream,
            pre_ramp_pesticide: None,
            collapsed: false,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn farmers(&self) -> &[FarmerState] {
        &self.farmers
    }

    pub fn market(&self) -> &MarketState {
        &self.market
    }

    pub fn ecology(&self) -> &EcologyState {
        &self.ecology
    }

    /// Year the next call to [`Simulation::step_year`] simulates.
    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn collapsed(&self) -> bool {
        self.collapsed
    }

    pub fn finished(&self) -> bool {
        self.collapsed || self.year > self.params.end_year
    }

    /// Simulates one year and returns its frame. After a total collapse of the
    /// sector the frame is still returned and [`Simulation::collapsed`] is set.
    pub fn step_year(&mut self) -> Result<YearFrame> {
        let params = &self.params;
        let year = self.year;
        let n_active = self.farmers.iter().filter(|f| f.active).count();
        if n_active == 0 || self.collapsed {
            return Err(ModelError::SectorCollapse);
        }

        // Start-of-year state for the frame.
        let eco = self.ecology.clone();
        let leftover_start = self.market.leftover_land;
        let mut land_by_class = [0.0; 3];
        let mut farms_by_class = [0.0; 3];
        let mut total_land = 0.0;
        let mut pesticide_land = 0.0;
        for f in self.farmers.iter().filter(|f| f.active) {
            let c = SizeClass::of(f.land).index();
            land_by_class[c] += f.land;
            farms_by_class[c] += 1.0;
            total_land += f.land;
            pesticide_land += f.land * f.pesticide;
        }

        // (1) production
        let mut production = 0.0;
        for f in self.farmers.iter_mut().filter(|f| f.active) {
            let (_, output) = economy::produce(f, eco.pest, params, &mut self.stream);
            production += output;
        }

        // (2) market clearing and accounting
        self.market = economy::clear_market(production, &self.market, params);
        let price = self.market.price;
        let terms = subsidy_terms(&self.scenario, params, year);
        let mut total_subsidy = 0.0;
        let mut roi_sum = 0.0;
        let mut roi_by_class = [0.0; 3];
        let mut efficiency_sum = 0.0;
        for f in self.farmers.iter_mut().filter(|f| f.active) {
            let b = economy::account_profit(f, price, total_land, params, &terms, n_active);
            total_subsidy += b.subsidy;
            roi_sum += f.roi;
            roi_by_class[SizeClass::of(f.land).index()] += f.roi;
            efficiency_sum += f.efficiency;
        }

        let cohort_efficiency =
            self.farmers.iter().map(|f| f.efficiency).sum::<f64>() / self.farmers.len() as f64;

        // (3) technology adoption
        let mut gain_sum = 0.0;
        for f in self.farmers.iter_mut().filter(|f| f.active) {
            let before = f.efficiency;
            economy::adopt_technology(f, params, &mut self.stream);
            gain_sum += f.efficiency - before;
        }

        // (4) land market
        let settlement = land_market::settle_market(&mut self.farmers, &mut self.market, params)?;

        // (5) behaviour, with the regulatory cap for next year's rate
        if year == self.scenario.pre_ramp_year() {
            self.pre_ramp_pesticide = Some(self.farmers.iter().map(|f| f.pesticide).collect());
        }
        let next_year = year + 1;
        let prev_price = self.market.prev_price;
        for f in self.farmers.iter_mut().filter(|f| f.active) {
            let cap = self
                .pre_ramp_pesticide
                .as_ref()
                .and_then(|pre| pesticide_cap(&self.scenario, pre[f.id as usize], next_year));
            f.pesticide = behavior::update_pesticide(f, params, cap);
            f.yield_target = behavior::update_yield_target(f, price, prev_price, params);
        }

        // (6) ecology
        match ecology::advance(&eco, &self.farmers, params) {
            Ok(next) => self.ecology = next,
            Err(ModelError::SectorCollapse) => self.collapsed = true,
            Err(e) => return Err(e),
        }

        // (7) frame
        let n = n_active as f64;
        let frame = YearFrame {
            year,
            eps: eco.eps,
            pest: eco.pest,
            carrying: eco.carrying,
            price,
            total_production: production,
            demand: self.market.demand,
            n_active: n,
            mean_farm_size: total_land / n,
            weighted_pesticide_mean: pesticide_land / total_land,
            mean_yield: production / total_land,
            mean_efficiency: efficiency_sum / n,
            cohort_efficiency,
            efficiency_gain: gain_sum / n,
            mean_roi: roi_sum / n,
            mean_roi_small: roi_by_class[0] / farms_by_class[0],
            mean_roi_medium: roi_by_class[1] / farms_by_class[1],
            mean_roi_large: roi_by_class[2] / farms_by_class[2],
            leftover_land: leftover_start,
            land_small: land_by_class[0],
            land_medium: land_by_class[1],
            land_large: land_by_class[2],
            farms_small: farms_by_class[0],
            farms_medium: farms_by_class[1],
            farms_large: farms_by_class[2],
            subsidy_per_farmer: terms.flat_per_farmer(n_active),
            subsidy_per_hectare: terms.per_hectare(total_land),
            total_subsidy,
            land_released: settlement.released,
            land_acquired: settlement.acquired,
            land_available: settlement.available,
            exits: settlement.exits.len() as f64,
        };
        self.year += 1;
        Ok(frame)
    }

    /// Runs the remaining years. Stops early, with `collapsed` set, if no
    /// farmer is left.
    pub fn run(mut self) -> Result<ReplicaRun> {
        let mut frames = Vec::with_capacity(self.params.n_years());
        while !self.finished() {
            frames.push(self.step_year()?);
        }
        Ok(ReplicaRun {
            seed: self.stream.seed(),
            frames,
            collapsed: self.collapsed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRun {
    pub seed: u64,
    pub frames: Vec<YearFrame>,
    pub collapsed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub scenario: ScenarioConfig,
    pub replicas: Vec<ReplicaRun>,
    /// Field-wise mean across replicas over the years all replicas reached.
    pub mean: Vec<YearFrame>,
    /// Standard error of the mean, same layout as `mean`.
    pub std_err: Vec<YearFrame>,
}

impl ScenarioRun {
    pub fn any_collapsed(&self) -> bool {
        self.replicas.iter().any(|r| r.collapsed)
    }

    pub fn mean_at(&self, year: i32) -> Option<&YearFrame> {
        self.mean.iter().find(|f| f.year == year)
    }

    pub fn std_err_at(&self, year: i32) -> Option<&YearFrame> {
        self.std_err.iter().find(|f| f.year == year)
    }

    /// Series of one frame field from the mean run.
    pub fn series(&self, field: &str) -> Vec<(i32, f64)> {
        self.mean
            .iter()
            .map(|f| (f.year, f.get(field).unwrap_or(f64::NAN)))
            .collect()
    }
}

pub fn run_replica(
    params: &ModelParams,
    scenario: &ScenarioConfig,
    histogram: &SizeHistogram,
    seed: u64,
) -> Result<ReplicaRun> {
    Simulation::new(params, scenario, histogram, seed)?.run()
}

/// Runs one replica per seed in parallel and reduces them to mean and
/// standard-error series.
pub fn run_scenario(
    params: &ModelParams,
    scenario: &ScenarioConfig,
    histogram: &SizeHistogram,
    seeds: &[u64],
) -> Result<ScenarioRun> {
    if seeds.is_empty() {
        return Err(ModelError::NoSeeds);
    }
    let replicas = seeds
        .par_iter()
        .map(|&seed| run_replica(params, scenario, histogram, seed))
        .collect::<Result<Vec<_>>>()?;
    let (mean, std_err) = monte_carlo_summary(&replicas);
    Ok(ScenarioRun {
        scenario: scenario.clone(),
        replicas,
        mean,
        std_err,
    })
}

/// Mean and standard error of every frame field across replicas. `NaN`
/// entries (empty size classes) are skipped per field.
pub fn monte_carlo_summary(replicas: &[ReplicaRun]) -> (Vec<YearFrame>, Vec<YearFrame>) {
    let len = replicas.iter().map(|r| r.frames.len()).min().unwrap_or(0);
    let mut mean = Vec::with_capacity(len);
    let mut std_err = Vec::with_capacity(len);
    for t in 0..len {
        let year = replicas[0].frames[t].year;
        let rows: Vec<Vec<f64>> = replicas.iter().map(|r| r.frames[t].values()).collect();
        let mut m = Vec::with_capacity(YearFrame::FIELDS.len());
        let mut se = Vec::with_capacity(YearFrame::FIELDS.len());
        for j in 0..YearFrame::FIELDS.len() {
            let xs: Vec<f64> = rows.iter().map(|r| r[j]).filter(|v| !v.is_nan()).collect();
            let (mu, s) = mean_and_std_err(&xs);
            m.push(mu);
            se.push(s);
        }
        mean.push(YearFrame::from_values(year, &m));
        std_err.push(YearFrame::from_values(year, &se));
    }
    (mean, std_err)
}

fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    match xs.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (xs[0], 0.0),
        n => {
            let nf = n as f64;
            let mu = xs.iter().sum::<f64>() / nf;
            let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (nf - 1.0);
            (mu, (var / nf).sqrt())
        }
    }
}

/// Mean yearly efficiency gain per farmer: the per-farmer increment of each
/// year, averaged over the frames. Selection through exits does not count.
pub fn mean_efficiency_gain(frames: &[YearFrame]) -> Option<f64> {
    if frames.is_empty() {
        return None;
    }
    Some(frames.iter().map(|f| f.efficiency_gain).sum::<f64>() / frames.len() as f64)
}
