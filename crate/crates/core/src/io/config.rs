//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationSpec;
use crate::error::{ModelError, Result};
use crate::params::ModelParams;
use crate::policy::ScenarioConfig;

/// Environment variable naming the config file used when none is given.
pub const CONFIG_ENV: &str = "AGROBIO_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Explicit replica seeds. When empty, `replicas` seeds starting at
    /// `base_seed` are used.
    pub seeds: Vec<u64>,
    pub base_seed: u64,
    pub replicas: usize,
    pub start_year: i32,
    pub end_year: i32,
    /// Shrink the sector tenfold (farms, land, subsidies and demand).
    pub desk_scale: bool,
    /// Reallocation levels of the sweep.
    pub theta_grid: Vec<f64>,
    /// Year at which sensitivity outcomes are compared.
    pub sensitivity_year: i32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            seeds: Vec::new(),
            base_seed: 1,
            replicas: 10,
            start_year: 1990,
            end_year: 2075,
            desk_scale: false,
            theta_grid: vec![0.0, 0.001, 0.002, 0.003, 0.005, 0.01, 0.02, 0.05, 0.1],
            sensitivity_year: 2020,
        }
    }
}

impl EngineConfig {
    pub fn seed_list(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.replicas as u64).map(|i| self.base_seed + i).collect()
        } else {
            self.seeds.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Relative paths resolve against the config file's directory.
    pub reference_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            reference_dir: PathBuf::from("data/reference"),
            output_dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub scenario: ScenarioConfig,
    pub engine: EngineConfig,
    pub calibration: CalibrationSpec,
    pub paths: PathsConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ModelError::Config(e.to_string()))
    }

    /// Reads and validates a config file; relative paths in it become
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            ModelError::Config(m) => ModelError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.paths.reference_dir, &mut cfg.paths.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Model parameters with the engine years and scaling applied.
    pub fn params(&self) -> ModelParams {
        let mut p = self.model.clone();
        p.start_year = self.engine.start_year;
        p.end_year = self.engine.end_year;
        if self.engine.desk_scale {
            p = p.desk_scale();
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.scenario.validate()?;
        self.calibration.validate()?;
        let e = &self.engine;
        if e.end_year < e.start_year {
            return Err(ModelError::Config(format!(
                "engine years {}-{} are empty",
                e.start_year, e.end_year
            )));
        }
        if e.seed_list().is_empty() {
            return Err(ModelError::NoSeeds);
        }
        if let Some(t) = e.theta_grid.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(ModelError::Config(format!("theta_grid value {t} outside [0, 1)")));
        }
        Ok(())
    }
}
