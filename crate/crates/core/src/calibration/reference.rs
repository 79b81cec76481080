//! Observed historical series used as calibration targets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::YearFrame;
use crate::error::{ModelError, Result};
use crate::init::{SizeBin, SizeHistogram};
use crate::state::SizeClass;

pub const BIODIVERSITY: &str = "biodiversity";
pub const PESTICIDE: &str = "pesticide";
pub const PRICE_INDEX: &str = "price_index";
pub const YIELD: &str = "yield";
pub const FARMER_COUNT: &str = "farmer_count";
pub const LAND_SMALL: &str = "land_small";
pub const LAND_MEDIUM: &str = "land_medium";
pub const LAND_LARGE: &str = "land_large";
pub const MEAN_FARM_SIZE: &str = "mean_farm_size";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSeries {
    pub years: Vec<i32>,
    pub values: Vec<f64>,
    /// Free-text source note carried through to reports.
    pub provenance: String,
}

impl ObservedSeries {
    pub fn new(points: Vec<(i32, f64)>, provenance: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(ModelError::Calibration("empty observed series".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ModelError::Calibration(format!(
                    "years must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some((y, v)) = points.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::Calibration(format!(
                "non-finite value {v} in {y}"
            )));
        }
        let (years, values) = points.into_iter().unzip();
        Ok(ObservedSeries {
            years,
            values,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn value_at(&self, year: i32) -> Option<f64> {
        self.years
            .binary_search(&year)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn points(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.years.iter().copied().zip(self.values.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Keeps the years inside `[first, last]`.
    pub fn window(&self, first: i32, last: i32) -> ObservedSeries {
        let (years, values) = self
            .points()
            .filter(|(y, _)| (first..=last).contains(y))
            .unzip();
        ObservedSeries {
            years,
            values,
            provenance: self.provenance.clone(),
        }
    }
}

/// One row of a structural census table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub year: i32,
    pub low: f64,
    pub high: f64,
    pub farm_count: f64,
    pub total_land: f64,
}

/// Linear interpolation of a sparse series onto every year between the first
/// and last observation. No extrapolation.
pub fn interpolate_structural(points: &[(i32, f64)]) -> Result<Vec<(i32, f64)>> {
    if points.len() < 2 {
        return Err(ModelError::Calibration(
            "interpolation needs at least two observations".into(),
        ));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(ModelError::Calibration(format!(
                "observation years must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    let mut out = Vec::with_capacity((points[points.len() - 1].0 - points[0].0 + 1) as usize);
    for w in points.windows(2) {
        let ((y0, v0), (y1, v1)) = (w[0], w[1]);
        for y in y0..y1 {
            let t = (y - y0) as f64 / (y1 - y0) as f64;
            out.push((y, v0 + t * (v1 - v0)));
        }
    }
    out.push(points[points.len() - 1]);
    Ok(out)
}

/// All observed targets, keyed by series name. Iteration order is the name
/// order, which fixes the summation order of the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSeries {
    pub series: BTreeMap<String, ObservedSeries>,
    /// Farm count of the earliest census; sets the scale for count and land
    /// series when the simulated sector is smaller than the real one.
    pub census_farm_count: Option<f64>,
}

fn census_years(rows: &[CensusRow]) -> Vec<i32> {
    let mut years: Vec<i32> = rows.iter().map(|r| r.year).collect();
    years.sort_unstable();
    years.dedup();
    years
}

/// Size-class histogram of the census rows for `year`.
pub fn census_histogram(rows: &[CensusRow], year: i32) -> Result<SizeHistogram> {
    let bins: Vec<SizeBin> = rows
        .iter()
        .filter(|r| r.year == year)
        .map(|r| SizeBin {
            low: r.low,
            high: r.high,
            count: r.farm_count,
        })
        .collect();
    if bins.is_empty() {
        return Err(ModelError::InvalidHistogram(format!(
            "no census rows for {year}"
        )));
    }
    SizeHistogram::new(bins)
}

impl ReferenceSeries {
    /// Builds the target set from annual series and census rows. Census
    /// aggregates (farm count, land per size class, mean farm size) are
    /// interpolated to yearly values.
    pub fn from_parts(
        annual: BTreeMap<String, ObservedSeries>,
        census: &[CensusRow],
        census_provenance: &str,
    ) -> Result<Self> {
        let mut series = annual;
        let years = census_years(census);
        let mut census_farm_count = None;
        if !years.is_empty() {
            let mut count = Vec::new();
            let mut land = [Vec::new(), Vec::new(), Vec::new()];
            let mut size = Vec::new();
            for &y in &years {
                let mut n = 0.0;
                let mut by_class = [0.0; 3];
                for r in census.iter().filter(|r| r.year == y) {
                    n += r.farm_count;
                    by_class[SizeClass::of(0.5 * (r.low + r.high)).index()] += r.total_land;
                }
                if !(n > 0.0) {
                    return Err(ModelError::Calibration(format!(
                        "census year {y} has no farms"
                    )));
                }
                count.push((y, n));
                for c in 0..3 {
                    land[c].push((y, by_class[c]));
                }
                size.push((y, by_class.iter().sum::<f64>() / n));
            }
            census_farm_count = Some(count[0].1);
            let dense = |pts: &[(i32, f64)]| -> Result<ObservedSeries> {
                let pts = if pts.len() >= 2 {
                    interpolate_structural(pts)?
                } else {
                    pts.to_vec()
                };
                ObservedSeries::new(pts, census_provenance)
            };
            series.insert(FARMER_COUNT.into(), dense(&count)?);
            series.insert(LAND_SMALL.into(), dense(&land[0])?);
            series.insert(LAND_MEDIUM.into(), dense(&land[1])?);
            series.insert(LAND_LARGE.into(), dense(&land[2])?);
            series.insert(MEAN_FARM_SIZE.into(), dense(&size)?);
        }
        Ok(ReferenceSeries {
            series,
            census_farm_count,
        })
    }

    pub fn get(&self, name: &str) -> Option<&ObservedSeries> {
        self.series.get(name)
    }

    /// Restricts every series to `[first, last]` and drops empty ones.
    pub fn window(&self, first: i32, last: i32) -> ReferenceSeries {
        ReferenceSeries {
            series: self
                .series
                .iter()
                .map(|(k, s)| (k.clone(), s.window(first, last)))
                .filter(|(_, s)| !s.is_empty())
                .collect(),
            census_farm_count: self.census_farm_count,
        }
    }

    pub fn total_points(&self) -> usize {
        self.series.values().map(|s| s.len()).sum()
    }
}

/// Simulated counterpart of an observed series. `scale` converts extensive
/// quantities (counts, land) of a scaled-down sector back to full size.
pub fn simulated_value(name: &str, frame: &YearFrame, first: &YearFrame, scale: f64) -> Option<f64> {
    Some(match name {
        BIODIVERSITY => frame.eps,
        PESTICIDE => frame.weighted_pesticide_mean,
        PRICE_INDEX => frame.price / first.price,
        YIELD => frame.mean_yield,
        FARMER_COUNT => frame.n_active / scale,
        LAND_SMALL => frame.land_small / scale,
        LAND_MEDIUM => frame.land_medium / scale,
        LAND_LARGE => frame.land_large / scale,
        MEAN_FARM_SIZE => frame.mean_farm_size,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_of_a_line() {
        let d = interpolate_structural(&[(1990, 300_000.0), (2000, 250_000.0)]).unwrap();
        assert_eq!(d.len(), 11);
        assert_eq!(d[5], (1995, 275_000.0));
        assert_eq!(d[0], (1990, 300_000.0));
        assert_eq!(d[10], (2000, 250_000.0));
    }

    #[test]
    fn observations_are_kept_and_collinear_input_stays_linear() {
        let pts = [(1990, 10.0), (1997, 24.0), (2010, 50.0)];
        let d = interpolate_structural(&pts).unwrap();
        assert_eq!(d.len(), 21);
        for (y, v) in &d {
            assert!((v - (10.0 + 2.0 * (*y - 1990) as f64)).abs() < 1e-12);
        }
        for (y, v) in pts {
            assert_eq!(d.iter().find(|p| p.0 == y).unwrap().1, v);
        }
    }

    #[test]
    fn single_point_is_an_error() {
        assert!(interpolate_structural(&[(1990, 1.0)]).is_err());
        assert!(interpolate_structural(&[(2000, 1.0), (1990, 2.0)]).is_err());
    }

    fn census() -> Vec<CensusRow> {
        let row = |year, low, high, farm_count, total_land| CensusRow {
            year,
            low,
            high,
            farm_count,
            total_land,
        };
        vec![
            row(1990, 0.0, 20.0, 100.0, 1000.0),
            row(1990, 20.0, 100.0, 50.0, 2500.0),
            row(1990, 100.0, 300.0, 10.0, 1500.0),
            row(2000, 0.0, 20.0, 60.0, 600.0),
            row(2000, 20.0, 100.0, 40.0, 2000.0),
            row(2000, 100.0, 300.0, 15.0, 2400.0),
        ]
    }

    #[test]
    fn census_aggregates_are_interpolated() {
        let r = ReferenceSeries::from_parts(BTreeMap::new(), &census(), "test").unwrap();
        assert_eq!(r.census_farm_count, Some(160.0));
        let n = r.get(FARMER_COUNT).unwrap();
        assert_eq!(n.len(), 11);
        assert_eq!(n.value_at(1995), Some(137.5));
        assert_eq!(r.get(LAND_LARGE).unwrap().value_at(2000), Some(2400.0));
        assert_eq!(r.get(MEAN_FARM_SIZE).unwrap().value_at(1990), Some(5000.0 / 160.0));
        assert_eq!(r.total_points(), 55);
        let h = census_histogram(&census(), 1990).unwrap();
        assert_eq!(h.total_count(), 160.0);
        assert!(census_histogram(&census(), 2005).is_err());
    }

    #[test]
    fn window_drops_outside_years() {
        let r = ReferenceSeries::from_parts(BTreeMap::new(), &census(), "test").unwrap();
        let w = r.window(1992, 1994);
        assert_eq!(w.get(FARMER_COUNT).unwrap().years, vec![1992, 1993, 1994]);
        assert!(r.window(2050, 2060).series.is_empty());
    }
}
