//! Quasi-random calibration against historical series and one-at-a-time
//! sensitivity analysis.
//!
//! Seven behavioural and market parameters are sampled on an unscrambled Sobol
//! sequence mapped onto their ranges. Each point runs a batch of baseline
//! replicas over the calibration window; the Monte Carlo mean is compared
//! with every observed series after normalisation, and the point with the
//! smallest residual sum of squares wins.

mod objective;
mod reference;
mod sensitivity;
mod sobol;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{mean_efficiency_gain, run_scenario, ScenarioRun};
use crate::error::{ModelError, Result};
use crate::init::SizeHistogram;
use crate::params::ModelParams;
use crate::policy::{ScenarioConfig, ScenarioKind};

pub use objective::{fit_statistics, FitStatistics, Normalization};
pub use reference::{
    census_histogram, interpolate_structural, simulated_value, CensusRow, ObservedSeries,
    ReferenceSeries, BIODIVERSITY, FARMER_COUNT, LAND_LARGE, LAND_MEDIUM, LAND_SMALL,
    MEAN_FARM_SIZE, PESTICIDE, PRICE_INDEX, YIELD,
};
pub use sensitivity::{sensitivity, SensitivityReport, SensitivityRow, SENSITIVITY_FACTORS};
pub use sobol::{Sobol, MAX_DIMENSIONS};

/// The calibrated parameters, in sampling-dimension order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibratedParam {
    Alpha,
    Lambda,
    Gamma,
    Beta,
    Eta,
    ProfitRef,
    UpsilonMax,
}

impl CalibratedParam {
    pub const ALL: [CalibratedParam; 7] = [
        CalibratedParam::Alpha,
        CalibratedParam::Lambda,
        CalibratedParam::Gamma,
        CalibratedParam::Beta,
        CalibratedParam::Eta,
        CalibratedParam::ProfitRef,
        CalibratedParam::UpsilonMax,
    ];

    /// Field name in [`ModelParams`].
    pub fn name(self) -> &'static str {
        match self {
            CalibratedParam::Alpha => "alpha",
            CalibratedParam::Lambda => "lambda",
            CalibratedParam::Gamma => "gamma",
            CalibratedParam::Beta => "beta",
            CalibratedParam::Eta => "eta",
            CalibratedParam::ProfitRef => "profit_ref",
            CalibratedParam::UpsilonMax => "upsilon_max",
        }
    }

    pub fn get(self, p: &ModelParams) -> f64 {
        match self {
            CalibratedParam::Alpha => p.alpha,
            CalibratedParam::Lambda => p.lambda,
            CalibratedParam::Gamma => p.gamma,
            CalibratedParam::Beta => p.beta,
            CalibratedParam::Eta => p.eta,
            CalibratedParam::ProfitRef => p.profit_ref,
            CalibratedParam::UpsilonMax => p.upsilon_max,
        }
    }

    pub fn set(self, p: &mut ModelParams, value: f64) {
        let slot = match self {
            CalibratedParam::Alpha => &mut p.alpha,
            CalibratedParam::Lambda => &mut p.lambda,
            CalibratedParam::Gamma => &mut p.gamma,
            CalibratedParam::Beta => &mut p.beta,
            CalibratedParam::Eta => &mut p.eta,
            CalibratedParam::ProfitRef => &mut p.profit_ref,
            CalibratedParam::UpsilonMax => &mut p.upsilon_max,
        };
        *slot = value;
    }
}

/// Best-fit values of the original calibration, in [`CalibratedParam::ALL`]
/// order. Note gamma: 3.0 here, while the scenario defaults use 2.
pub const OPTIMAL_POINT: [f64; 7] = [0.08, 0.2, 3.0, 0.45, 0.15, 1000.0, 0.10];

/// Sampling intervals `[low, high]` per calibrated parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterRanges {
    pub alpha: [f64; 2],
    pub lambda: [f64; 2],
    pub gamma: [f64; 2],
    pub beta: [f64; 2],
    pub eta: [f64; 2],
    pub profit_ref: [f64; 2],
    pub upsilon_max: [f64; 2],
}

impl Default for ParameterRanges {
    fn default() -> Self {
        ParameterRanges {
            alpha: [0.01, 0.1],
            lambda: [0.1, 0.5],
            gamma: [1.0, 3.5],
            beta: [0.4, 0.5],
            eta: [0.05, 0.5],
            profit_ref: [150.0, 1500.0],
            upsilon_max: [0.05, 0.5],
        }
    }
}

impl ParameterRanges {
    pub fn get(&self, p: CalibratedParam) -> [f64; 2] {
        match p {
            CalibratedParam::Alpha => self.alpha,
            CalibratedParam::Lambda => self.lambda,
            CalibratedParam::Gamma => self.gamma,
            CalibratedParam::Beta => self.beta,
            CalibratedParam::Eta => self.eta,
            CalibratedParam::ProfitRef => self.profit_ref,
            CalibratedParam::UpsilonMax => self.upsilon_max,
        }
    }
}

/// Default number of Sobol points for a full calibration.
pub const FULL_SOBOL_POINTS: usize = 4096;
/// Default number of Sobol points at desk scale.
pub const DESK_SOBOL_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSpec {
    pub ranges: ParameterRanges,
    pub sobol_points: usize,
    pub replicas_per_point: usize,
    /// First and last calibration year, inclusive.
    pub period: [i32; 2],
    pub normalization: Normalization,
    /// Replica `i` of every point uses seed `base_seed + i`.
    pub base_seed: u64,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        CalibrationSpec {
            ranges: ParameterRanges::default(),
            sobol_points: FULL_SOBOL_POINTS,
            replicas_per_point: 10,
            period: [1990, 2021],
            normalization: Normalization::MeanScaling,
            base_seed: 1,
        }
    }
}

impl CalibrationSpec {
    pub fn validate(&self) -> Result<()> {
        for p in CalibratedParam::ALL {
            let [lo, hi] = self.ranges.get(p);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ModelError::Calibration(format!(
                    "range for `{}` must satisfy low < high, got [{lo}, {hi}]",
                    p.name()
                )));
            }
        }
        if self.sobol_points == 0 || self.replicas_per_point == 0 {
            return Err(ModelError::Calibration(
                "sobol_points and replicas_per_point must be positive".into(),
            ));
        }
        if self.period[1] < self.period[0] {
            return Err(ModelError::Calibration(format!(
                "calibration period {}-{} is empty",
                self.period[0], self.period[1]
            )));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicas_per_point as u64)
            .map(|i| self.base_seed + i)
            .collect()
    }

    /// Affine map of a unit-cube point onto the ranges.
    pub fn map_point(&self, unit: &[f64]) -> [f64; 7] {
        let mut out = [0.0; 7];
        for (i, p) in CalibratedParam::ALL.iter().enumerate() {
            let [lo, hi] = self.ranges.get(*p);
            out[i] = lo + unit[i] * (hi - lo);
        }
        out
    }

    /// Mapped Sobol points, index 0 first.
    pub fn sample_points(&self) -> Result<Vec<[f64; 7]>> {
        Ok(Sobol::points(7, self.sobol_points)?
            .iter()
            .map(|u| self.map_point(u))
            .collect())
    }
}

/// `params` with the calibrated parameters replaced by `point`.
pub fn apply_point(params: &ModelParams, point: &[f64; 7]) -> ModelParams {
    let mut p = params.clone();
    for (param, v) in CalibratedParam::ALL.iter().zip(point) {
        param.set(&mut p, *v);
    }
    p
}

/// Goodness of fit of one parameter set over the calibration window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub stats: FitStatistics,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    /// Mean yearly efficiency gain per farmer.
    pub efficiency_gain: f64,
}

/// Count and land series of a scaled-down sector are divided by this factor.
fn extensive_scale(params: &ModelParams, reference: &ReferenceSeries) -> f64 {
    match reference.census_farm_count {
        Some(n) if n > 0.0 => params.n0 as f64 / n,
        _ => 1.0,
    }
}

fn window_params(params: &ModelParams, spec: &CalibrationSpec) -> ModelParams {
    let mut p = params.clone();
    p.start_year = spec.period[0];
    p.end_year = spec.period[1];
    p
}

/// Baseline Monte Carlo run over the calibration window.
pub fn calibration_run(
    params: &ModelParams,
    histogram: &SizeHistogram,
    spec: &CalibrationSpec,
) -> Result<ScenarioRun> {
    run_scenario(
        &window_params(params, spec),
        &ScenarioConfig::of_kind(ScenarioKind::Baseline),
        histogram,
        &spec.seeds(),
    )
}

/// Fit statistics of a finished calibration-window run.
pub fn fit_of_run(
    run: &ScenarioRun,
    params: &ModelParams,
    reference: &ReferenceSeries,
    spec: &CalibrationSpec,
) -> Result<Fit> {
    if run.any_collapsed() {
        return Err(ModelError::SectorCollapse);
    }
    let reference = reference.window(spec.period[0], spec.period[1]);
    let stats = fit_statistics(
        &run.mean,
        &reference,
        spec.normalization,
        extensive_scale(params, &reference),
    )?;
    Ok(Fit {
        r_squared: stats.r_squared(),
        adjusted_r_squared: stats.adjusted_r_squared(CalibratedParam::ALL.len()),
        efficiency_gain: mean_efficiency_gain(&run.mean).unwrap_or(f64::NAN),
        stats,
    })
}

/// Runs the calibration window for `params` and scores it.
pub fn evaluate_fit(
    params: &ModelParams,
    histogram: &SizeHistogram,
    reference: &ReferenceSeries,
    spec: &CalibrationSpec,
) -> Result<Fit> {
    let run = calibration_run(params, histogram, spec)?;
    fit_of_run(&run, params, reference, spec)
}

fn is_rejection(e: &ModelError) -> bool {
    matches!(
        e,
        ModelError::SectorCollapse | ModelError::NonPositiveInitialPrice(_)
    )
}

/// Residual sum of squares of `params`; a collapsing or infeasible point
/// scores `+inf`.
pub fn objective(
    params: &ModelParams,
    histogram: &SizeHistogram,
    reference: &ReferenceSeries,
    spec: &CalibrationSpec,
) -> Result<f64> {
    match evaluate_fit(params, histogram, reference, spec) {
        Ok(fit) => Ok(fit.stats.ss_res),
        Err(e) if is_rejection(&e) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Grid search over the carrying-capacity weight `mu` for the model variant
/// described by `scenario`'s overrides. Returns the best `mu` and its SSE.
pub fn reestimate_mu(
    params: &ModelParams,
    scenario: &ScenarioConfig,
    histogram: &SizeHistogram,
    reference: &ReferenceSeries,
    spec: &CalibrationSpec,
    grid: &[f64],
) -> Result<(f64, f64)> {
    let base = ScenarioConfig {
        mu_override: None,
        ..scenario.clone()
    }
    .apply_to(params);
    let scores = grid
        .par_iter()
        .map(|&mu| {
            let mut p = base.clone();
            p.mu = mu;
            p.validate()?;
            Ok((mu, objective(&p, histogram, reference, spec)?))
        })
        .collect::<Result<Vec<_>>>()?;
    scores
        .into_iter()
        .filter(|(_, sse)| sse.is_finite())
        .fold(None::<(f64, f64)>, |acc, s| match acc {
            Some(b) if b.1 <= s.1 => Some(b),
            _ => Some(s),
        })
        .ok_or_else(|| ModelError::Calibration("every mu candidate was rejected".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub index: usize,
    pub values: [f64; 7],
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub spec: CalibrationSpec,
    /// Every evaluated point in sequence order.
    pub samples: Vec<SamplePoint>,
    pub best: SamplePoint,
    pub best_params: ModelParams,
    pub fit: Fit,
}

/// Evaluates every Sobol point and returns the best one with its fit.
pub fn calibrate(
    params: &ModelParams,
    histogram: &SizeHistogram,
    reference: &ReferenceSeries,
    spec: &CalibrationSpec,
) -> Result<CalibrationReport> {
    spec.validate()?;
    let points = spec.sample_points()?;
    let samples = points
        .par_iter()
        .enumerate()
        .map(|(index, values)| {
            let p = apply_point(params, values);
            p.validate()?;
            Ok(SamplePoint {
                index,
                values: *values,
                sse: objective(&p, histogram, reference, spec)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // Strict comparison keeps the lowest index on ties.
    let best = samples
        .iter()
        .filter(|s| s.sse.is_finite())
        .fold(None::<&SamplePoint>, |acc, s| match acc {
            Some(b) if b.sse <= s.sse => Some(b),
            _ => Some(s),
        })
        .cloned()
        .ok_or_else(|| ModelError::Calibration("every sample point was rejected".into()))?;
    let best_params = apply_point(params, &best.values);
    let fit = evaluate_fit(&best_params, histogram, reference, spec)?;
    Ok(CalibrationReport {
        spec: spec.clone(),
        samples,
        best,
        best_params,
        fit,
    })
}

impl CalibrationReport {
    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let rejected = self.samples.iter().filter(|p| !p.sse.is_finite()).count();
        let _ = writeln!(
            s,
            "calibration: {} points, {} rejected, {} replicas each, {}-{}",
            self.samples.len(),
            rejected,
            self.spec.replicas_per_point,
            self.spec.period[0],
            self.spec.period[1]
        );
        let _ = writeln!(s, "best point: #{} (SSE {:.6})", self.best.index, self.best.sse);
        for (p, v) in CalibratedParam::ALL.iter().zip(&self.best.values) {
            let _ = writeln!(s, "  {:<12} {v:.6}", p.name());
        }
        let _ = writeln!(s, "R2            {:.4}", self.fit.r_squared);
        let _ = writeln!(s, "adjusted R2   {:.4}", self.fit.adjusted_r_squared);
        let _ = writeln!(s, "points        {}", self.fit.stats.n_points);
        let _ = writeln!(s, "efficiency gain per year {:.4}", self.fit.efficiency_gain);
        for (name, sse) in &self.fit.stats.per_series {
            let _ = writeln!(s, "  SSE {name:<16} {sse:.6}");
        }
        s
    }
}
