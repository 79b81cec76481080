//! Model constants.
//!
//! Defaults reproduce the reference parameterisation of the French field-crop
//! sector (1990 start). Units are given per field; every monetary value is in
//! euros and every rate is per year.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// How acquisition demand is rationed against the land available for rent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RationingRule {
    /// `phi = min(1, available / demanded)`; never hands out more land than exists.
    #[default]
    Feasible,
    /// `phi = min(1, demanded / available)`, the ratio as literally printed in the
    /// original model description. Over-allocates whenever demand exceeds supply,
    /// so runs using it abort with [`ModelError::NegativeLeftover`] in that case.
    PrintedRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Number of farms at the start year.
    pub n0: usize,
    /// Total agricultural land [ha].
    pub l0_total: f64,
    /// Average initial pesticide use [kg/ha/yr].
    pub p_bar0: f64,
    /// Average initial yield [t/ha/yr].
    pub y_bar0: f64,
    /// Potential pest damage at the start year (pesticide-free yield loss fraction).
    pub pi0: f64,
    /// Average initial return on investment [1/yr].
    pub r0: f64,
    /// Reference demand [t/yr]. The simulated demand is derived from initial
    /// production; this value is only used as a consistency check.
    pub demand: f64,
    /// Intrinsic growth rate of the bird population [1/yr].
    pub r_eps: f64,
    /// Carrying capacity weight of farm size versus pesticide use.
    pub mu: f64,
    /// Pest exposure response exponent to biodiversity.
    pub a: f64,
    /// Maximum attainable yield [t/ha/yr].
    pub y_max: f64,
    /// Pesticide normalisation level in the production function [kg/ha/yr].
    pub p_ref_pesticide: f64,
    /// Standard deviation of the multiplicative production noise.
    pub xi_std: f64,
    /// Price friction.
    pub alpha: f64,
    /// Pesticide price [EUR/kg].
    pub p_pesticide: f64,
    /// Operating costs [EUR/ha/yr].
    pub c_op: f64,
    /// Non-operating costs [EUR/ha/yr].
    pub c_nonop: f64,
    /// Economy of scale exponent on non-operating costs.
    pub b: f64,
    /// Total subsidy budget [EUR/yr].
    pub s_total: f64,
    /// Profit share invested in technology.
    pub eta: f64,
    /// Reference profit for technology adoption [EUR/yr].
    pub profit_ref: f64,
    /// Maximum efficiency gain per successful adoption.
    pub upsilon_max: f64,
    /// Land adjustment speed [1/yr].
    pub beta: f64,
    /// Opportunity cost (reference return on investment) [1/yr].
    pub r_ref: f64,
    /// Pesticide adjustment speed.
    pub gamma: f64,
    /// Yield target adjustment speed.
    pub lambda: f64,
    /// Efficiency exponent inside the pesticide aggregate of the carrying capacity.
    /// `0` gives the plain land-weighted pesticide mean.
    pub k: f64,
    /// Lower bound on the biodiversity index.
    pub eps_floor: f64,
    /// Simulated years; set from the engine block of a run config.
    #[serde(skip)]
    pub start_year: i32,
    #[serde(skip)]
    pub end_year: i32,
    pub rationing: RationingRule,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n0: 300_000,
            l0_total: 10e6,
            p_bar0: 5.0,
            y_bar0: 7.0,
            pi0: 0.3,
            r0: 0.05,
            demand: 7e7,
            r_eps: 0.1,
            mu: 0.9,
            a: 0.5,
            y_max: 8.5,
            p_ref_pesticide: 10.0,
            xi_std: 0.05,
            alpha: 0.08,
            p_pesticide: 10.0,
            c_op: 500.0,
            c_nonop: 600.0,
            b: 0.9,
            s_total: 5e9,
            eta: 0.15,
            profit_ref: 1000.0,
            upsilon_max: 0.1,
            beta: 0.45,
            r_ref: 0.05,
            gamma: 2.0,
            lambda: 0.2,
            k: 0.0,
            eps_floor: 1e-6,
            start_year: 1990,
            end_year: 2075,
            rationing: RationingRule::Feasible,
        }
    }
}

/// Scale factor applied by [`ModelParams::desk_scale`].
pub const DESK_SCALE: f64 = 0.1;

impl ModelParams {
    /// Shrinks the sector by `factor` while keeping every per-farm quantity
    /// unchanged: farm count, land and the subsidy budget scale together, so
    /// the mean farm size and the subsidy per hectare stay the same.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut p = self.clone();
        p.n0 = ((self.n0 as f64) * factor).round().max(1.0) as usize;
        p.l0_total = self.l0_total * factor;
        p.s_total = self.s_total * factor;
        p.demand = self.demand * factor;
        p
    }

    /// 1/10 scaling used for desk-sized runs (30 000 farms instead of 300 000).
    pub fn desk_scale(&self) -> Self {
        self.scaled(DESK_SCALE)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start_year..=self.end_year
    }

    pub fn n_years(&self) -> usize {
        (self.end_year - self.start_year + 1) as usize
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must be strictly positive, got {v}"),
                })
            }
        }
        fn within(name: &'static str, v: f64, lo: f64, hi: f64, lo_open: bool) -> Result<()> {
            let lo_ok = if lo_open { v > lo } else { v >= lo };
            if v.is_finite() && lo_ok && v <= hi {
                Ok(())
            } else {
                let open = if lo_open { "(" } else { "[" };
                Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must lie in {open}{lo}, {hi}], got {v}"),
                })
            }
        }

        if self.n0 == 0 {
            return Err(ModelError::InvalidParameter {
                name: "n0",
                reason: "must be at least one farm".into(),
            });
        }
        for (name, v) in [
            ("l0_total", self.l0_total),
            ("p_bar0", self.p_bar0),
            ("y_bar0", self.y_bar0),
            ("r0", self.r0),
            ("demand", self.demand),
            ("r_eps", self.r_eps),
            ("y_max", self.y_max),
            ("p_ref_pesticide", self.p_ref_pesticide),
            ("p_pesticide", self.p_pesticide),
            ("c_op", self.c_op),
            ("c_nonop", self.c_nonop),
            ("s_total", self.s_total),
            ("profit_ref", self.profit_ref),
            ("beta", self.beta),
            ("r_ref", self.r_ref),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("eps_floor", self.eps_floor),
        ] {
            positive(name, v)?;
        }
        // Zero noise and zero technology gains give deterministic runs.
        for (name, v) in [("xi_std", self.xi_std), ("upsilon_max", self.upsilon_max)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must be non-negative, got {v}"),
                });
            }
        }
        within("pi0", self.pi0, 0.0, 1.0, true)?;
        if self.pi0 >= 1.0 {
            return Err(ModelError::InvalidParameter {
                name: "pi0",
                reason: "must be below 1".into(),
            });
        }
        within("mu", self.mu, 0.0, 1.0, false)?;
        within("eta", self.eta, 0.0, 1.0, false)?;
        within("b", self.b, 0.0, 1.0, true)?;
        within("alpha", self.alpha, 0.0, 1.0, true)?;
        within("k", self.k, 0.0, 1.0, false)?;
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "a",
                reason: format!("must be non-negative, got {}", self.a),
            });
        }
        if self.y_bar0 >= self.y_max {
            return Err(ModelError::InvalidParameter {
                name: "y_bar0",
                reason: format!("must be below y_max = {}", self.y_max),
            });
        }
        if self.start_year >= self.end_year {
            return Err(ModelError::InvalidParameter {
                name: "start_year",
                reason: format!(
                    "must precede end_year ({} >= {})",
                    self.start_year, self.end_year
                ),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn desk_scale_keeps_per_farm_quantities() {
        let p = ModelParams::default();
        let d = p.desk_scale();
        assert_eq!(d.n0, 30_000);
        assert!((d.l0_total / d.n0 as f64 - p.l0_total / p.n0 as f64).abs() < 1e-9);
        assert!((d.s_total / d.l0_total - p.s_total / p.l0_total).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range_values() {
        let mut p = ModelParams::default();
        p.mu = 1.5;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.end_year = p.start_year;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.c_op = 0.0;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.a = 0.0;
        p.k = 0.0;
        p.validate().unwrap();
    }

    #[test]
    fn year_count() {
        assert_eq!(ModelParams::default().n_years(), 86);
    }
}
