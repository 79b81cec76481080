//! Sum-of-squares objective and goodness of fit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::reference::{simulated_value, ReferenceSeries};
use crate::engine::YearFrame;
use crate::error::{ModelError, Result};

/// How each series is made unit-free before residuals are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide observed and simulated values by the observed mean.
    #[default]
    MeanScaling,
    /// Subtract the observed mean and divide by the observed standard deviation.
    ZScore,
    /// Use values as they are.
    Raw,
}

impl Normalization {
    fn transform(self, observed: &[f64]) -> impl Fn(f64) -> f64 {
        let n = observed.len() as f64;
        let mean = observed.iter().sum::<f64>() / n;
        let sd = (observed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let (shift, scale) = match self {
            Normalization::MeanScaling => (0.0, mean),
            Normalization::ZScore => (mean, if sd > 0.0 { sd } else { 1.0 }),
            Normalization::Raw => (0.0, 1.0),
        };
        let scale = if scale != 0.0 { scale } else { 1.0 };
        move |v| (v - shift) / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitStatistics {
    /// Sum of squared normalised residuals.
    pub ss_res: f64,
    /// Total sum of squares of the normalised observations around their
    /// concatenated mean.
    pub ss_tot: f64,
    pub n_points: usize,
    /// Residual sum of squares per series.
    pub per_series: BTreeMap<String, f64>,
}

impl FitStatistics {
    pub fn r_squared(&self) -> f64 {
        1.0 - self.ss_res / self.ss_tot
    }

    /// Adjusted for `p` free parameters.
    pub fn adjusted_r_squared(&self, p: usize) -> f64 {
        let n = self.n_points as f64;
        1.0 - (1.0 - self.r_squared()) * (n - 1.0) / (n - p as f64 - 1.0)
    }
}

/// Compares simulated frames with every observed series over the years both
/// cover. Frames must be in year order and start at the first simulated year.
pub fn fit_statistics(
    frames: &[YearFrame],
    reference: &ReferenceSeries,
    normalization: Normalization,
    scale: f64,
) -> Result<FitStatistics> {
    let first = frames
        .first()
        .ok_or_else(|| ModelError::Calibration("no simulated frames".into()))?;
    let mut per_series = BTreeMap::new();
    let mut observed_all = Vec::new();
    let mut ss_res = 0.0;
    for (name, series) in &reference.series {
        let mut obs = Vec::new();
        let mut sim = Vec::new();
        for (year, value) in series.points() {
            let Some(frame) = frames.iter().find(|f| f.year == year) else {
                continue;
            };
            let s = simulated_value(name, frame, first, scale).ok_or_else(|| {
                ModelError::Calibration(format!("no simulated counterpart for series `{name}`"))
            })?;
            obs.push(value);
            sim.push(s);
        }
        if obs.is_empty() {
            continue;
        }
        let norm = normalization.transform(&obs);
        let sse: f64 = obs
            .iter()
            .zip(&sim)
            .map(|(o, s)| (norm(*s) - norm(*o)).powi(2))
            .sum();
        ss_res += sse;
        per_series.insert(name.clone(), sse);
        observed_all.extend(obs.iter().map(|o| norm(*o)));
    }
    if observed_all.is_empty() {
        return Err(ModelError::Calibration(
            "simulation and reference data share no years".into(),
        ));
    }
    let mean = observed_all.iter().sum::<f64>() / observed_all.len() as f64;
    let ss_tot = observed_all.iter().map(|z| (z - mean).powi(2)).sum();
    Ok(FitStatistics {
        ss_res,
        ss_tot,
        n_points: observed_all.len(),
        per_series,
    })
}
