//! One-at-a-time perturbation of the calibrated parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CalibratedParam;
use crate::engine::{run_scenario, YearFrame};
use crate::error::{ModelError, Result};
use crate::init::SizeHistogram;
use crate::params::ModelParams;
use crate::policy::ScenarioConfig;

pub const SENSITIVITY_FACTORS: [f64; 2] = [0.5, 1.5];

/// Relative change of the outcomes at the report year versus the unperturbed
/// run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub parameter: CalibratedParam,
    pub factor: f64,
    pub eps: f64,
    pub pesticide: f64,
    pub farm_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub year: i32,
    /// Unperturbed outcomes: biodiversity, weighted pesticide, farm size.
    pub reference: [f64; 3],
    pub rows: Vec<SensitivityRow>,
}

impl SensitivityReport {
    /// Max minus min relative change over the factors, the unperturbed run
    /// (zero change) included, for biodiversity, pesticide and farm size.
    pub fn spread(&self, parameter: CalibratedParam) -> [f64; 3] {
        let mut lo = [0.0f64; 3];
        let mut hi = [0.0f64; 3];
        for r in self.rows.iter().filter(|r| r.parameter == parameter) {
            for (i, v) in [r.eps, r.pesticide, r.farm_size].into_iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]]
    }

    /// Parameter with the largest spread for outcome `i` (0 biodiversity,
    /// 1 pesticide, 2 farm size).
    pub fn most_influential(&self, i: usize) -> CalibratedParam {
        CalibratedParam::ALL
            .into_iter()
            .max_by(|a, b| self.spread(*a)[i].total_cmp(&self.spread(*b)[i]))
            .expect("seven parameters")
    }
}

fn outcomes(frame: &YearFrame) -> [f64; 3] {
    [frame.eps, frame.weighted_pesticide_mean, frame.mean_farm_size]
}

fn outcomes_at(
    params: &ModelParams,
    scenario: &ScenarioConfig,
    histogram: &SizeHistogram,
    seeds: &[u64],
    year: i32,
) -> Result<[f64; 3]> {
    let mut p = params.clone();
    p.end_year = year;
    let run = run_scenario(&p, scenario, histogram, seeds)?;
    run.mean_at(year)
        .map(outcomes)
        .ok_or(ModelError::SectorCollapse)
}

/// Scales each calibrated parameter of `params` by every factor in turn and
/// reports the relative change of the Monte Carlo mean outcomes at `year`.
pub fn sensitivity(
    params: &ModelParams,
    scenario: &ScenarioConfig,
    histogram: &SizeHistogram,
    seeds: &[u64],
    factors: &[f64],
    year: i32,
) -> Result<SensitivityReport> {
    if !(params.start_year..=params.end_year).contains(&year) {
        return Err(ModelError::Calibration(format!(
            "report year {year} outside the simulated period"
        )));
    }
    let reference = outcomes_at(params, scenario, histogram, seeds, year)?;
    let jobs: Vec<(CalibratedParam, f64)> = CalibratedParam::ALL
        .iter()
        .flat_map(|p| factors.iter().map(move |f| (*p, *f)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(parameter, factor)| {
            let mut p = params.clone();
            parameter.set(&mut p, parameter.get(params) * factor);
            p.validate()?;
            let o = outcomes_at(&p, scenario, histogram, seeds, year)?;
            let rel = |i: usize| (o[i] - reference[i]) / reference[i];
            Ok(SensitivityRow {
                parameter,
                factor,
                eps: rel(0),
                pesticide: rel(1),
                farm_size: rel(2),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityReport {
        year,
        reference,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::SizeBin;
    use crate::policy::ScenarioKind;

    fn histogram() -> SizeHistogram {
        SizeHistogram::new(vec![
            SizeBin { low: 1.0, high: 20.0, count: 100.0 },
            SizeBin { low: 20.0, high: 100.0, count: 150.0 },
            SizeBin { low: 100.0, high: 300.0, count: 20.0 },
        ])
        .unwrap()
    }

    #[test]
    fn unit_factor_gives_zero_variation() {
        let p = ModelParams::default().scaled(500.0 / 300_000.0);
        let s = ScenarioConfig::of_kind(ScenarioKind::Baseline);
        let r = sensitivity(&p, &s, &histogram(), &[1, 2], &[1.0], 1995).unwrap();
        assert_eq!(r.rows.len(), 7);
        for row in &r.rows {
            assert_eq!([row.eps, row.pesticide, row.farm_size], [0.0; 3]);
        }
        assert_eq!(r.spread(CalibratedParam::Beta), [0.0; 3]);
    }

    #[test]
    fn spread_and_year_checks() {
        let p = ModelParams::default().scaled(500.0 / 300_000.0);
        let s = ScenarioConfig::of_kind(ScenarioKind::Baseline);
        assert!(sensitivity(&p, &s, &histogram(), &[1], &[0.5], 2200).is_err());
        let r = sensitivity(&p, &s, &histogram(), &[1], &SENSITIVITY_FACTORS, 1995).unwrap();
        assert_eq!(r.rows.len(), 14);
        for param in CalibratedParam::ALL {
            assert!(r.spread(param).iter().all(|v| *v >= 0.0));
        }
        let top = r.most_influential(2);
        assert!(CalibratedParam::ALL
            .iter()
            .all(|p| r.spread(*p)[2] <= r.spread(top)[2]));
    }
}
