//! Agent-based bio-economic model of a national field-crop sector.
//!
//! Farmers produce a single crop on rented land, sell it on a common market,
//! invest part of their profit in pesticide efficiency, trade land on a
//! centralised rental market and adjust pesticide use towards a yield target.
//! Farmland bird biodiversity follows a logistic map whose carrying capacity
//! falls with mean farm size and pesticide use, and feeds back on yields via
//! pest exposure.
//!
//! The crate also carries the policy scenarios, the Monte Carlo engine, the
//! Sobol-sampled calibration and sensitivity harness, and file I/O.

pub mod behavior;
pub mod calibration;
pub mod ecology;
pub mod economy;
pub mod engine;
pub mod error;
pub mod init;
pub mod io;
pub mod land_market;
pub mod params;
pub mod policy;
pub mod random;
pub mod state;

pub use engine::{run_replica, run_scenario, ReplicaRun, ScenarioRun, Simulation, YearFrame};
pub use error::{ModelError, Result};
pub use init::{initialize_population, Population, SizeBin, SizeHistogram};
pub use params::{ModelParams, RationingRule};
pub use policy::{RampFormula, ScenarioConfig, ScenarioKind, SubsidyTerms};
pub use random::RandomStream;
pub use state::{EcologyState, FarmerState, MarketState, SizeClass};
