//! Policy scenarios: pesticide reduction ramp, flat per-farm coupon and
//! reallocation of part of the per-hectare budget to equal per-farm payments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_scenario, YearFrame};
use crate::error::{ModelError, Result};
use crate::init::SizeHistogram;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    #[default]
    Baseline,
    PesticideReduction,
    FlatSubsidy,
    Combined,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Baseline,
        ScenarioKind::PesticideReduction,
        ScenarioKind::FlatSubsidy,
        ScenarioKind::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Baseline => "baseline",
            ScenarioKind::PesticideReduction => "pesticide_reduction",
            ScenarioKind::FlatSubsidy => "flat_subsidy",
            ScenarioKind::Combined => "combined",
        }
    }

    pub fn parse(name: &str) -> Option<ScenarioKind> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn reduces_pesticide(self) -> bool {
        matches!(self, ScenarioKind::PesticideReduction | ScenarioKind::Combined)
    }
}

/// Shape of the pesticide cap over the ramp years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RampFormula {
    /// Linear descent from the pre-ramp rate to `(1 - reduction_fraction)` of it.
    #[default]
    LinearReduction,
    /// `P_pre * min(max((t - t_pre) / (t_end - t_pre), 0), 1)`: the expression as
    /// printed alongside the original policy description. It rises from `P_pre / 9`
    /// to `P_pre` and ignores `reduction_fraction`; kept for comparison runs.
    PrintedFootnote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// First year in which policies apply (and the first capped year).
    pub ramp_start_year: i32,
    /// Year in which the cap reaches its final level.
    pub ramp_end_year: i32,
    pub reduction_fraction: f64,
    pub ramp_formula: RampFormula,
    /// Flat coupon per active farmer in the flat-subsidy scenario [EUR/yr].
    pub flat_amount: f64,
    /// Fraction of the subsidy budget paid out equally per farmer (combined scenario).
    pub theta: f64,
    /// Replaces the pest exposure exponent `a`.
    pub variant_a: Option<f64>,
    /// Replaces the efficiency exponent `k` of the pesticide aggregate.
    pub variant_k: Option<f64>,
    pub mu_override: Option<f64>,
    pub eta_override: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            kind: ScenarioKind::Baseline,
            ramp_start_year: 2022,
            ramp_end_year: 2030,
            reduction_fraction: 0.5,
            ramp_formula: RampFormula::LinearReduction,
            flat_amount: 200.0,
            theta: 0.003,
            variant_a: None,
            variant_k: None,
            mu_override: None,
            eta_override: None,
        }
    }
}

impl ScenarioConfig {
    pub fn of_kind(kind: ScenarioKind) -> Self {
        ScenarioConfig {
            kind,
            ..Default::default()
        }
    }

    /// Baseline without the biodiversity feedback on pests (`a = 0`) and with
    /// the technology investment share re-estimated to 0.02.
    pub fn no_pest_feedback() -> Self {
        ScenarioConfig {
            variant_a: Some(0.0),
            eta_override: Some(0.02),
            ..Default::default()
        }
    }

    /// Baseline where efficiency gains bring no biodiversity benefit (`k = 1`);
    /// `mu` is the carrying-capacity weight refitted for that setting.
    pub fn technology_blind(mu: f64) -> Self {
        ScenarioConfig {
            variant_k: Some(1.0),
            mu_override: Some(mu),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ramp_start_year >= self.ramp_end_year {
            return Err(ModelError::InvalidScenario(format!(
                "ramp_start_year ({}) must precede ramp_end_year ({})",
                self.ramp_start_year, self.ramp_end_year
            )));
        }
        if !(self.reduction_fraction > 0.0 && self.reduction_fraction <= 1.0) {
            return Err(ModelError::InvalidScenario(format!(
                "reduction_fraction must lie in (0, 1], got {}",
                self.reduction_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(ModelError::InvalidScenario(format!(
                "theta must lie in [0, 1), got {}",
                self.theta
            )));
        }
        if !(self.flat_amount >= 0.0) {
            return Err(ModelError::InvalidScenario(format!(
                "flat_amount must be non-negative, got {}",
                self.flat_amount
            )));
        }
        Ok(())
    }

    /// Model parameters with the variant overrides of this scenario applied.
    pub fn apply_to(&self, params: &ModelParams) -> ModelParams {
        let mut p = params.clone();
        if let Some(a) = self.variant_a {
            p.a = a;
        }
        if let Some(k) = self.variant_k {
            p.k = k;
        }
        if let Some(mu) = self.mu_override {
            p.mu = mu;
        }
        if let Some(eta) = self.eta_override {
            p.eta = eta;
        }
        p
    }

    pub fn policy_active(&self, year: i32) -> bool {
        year >= self.ramp_start_year
    }

    /// Year whose pesticide rate anchors the cap.
    pub fn pre_ramp_year(&self) -> i32 {
        self.ramp_start_year - 1
    }
}

/// Regulatory ceiling on the pesticide rate used in `year`, for a farmer whose
/// rate in the pre-ramp year was `p_pre_ramp`. `None` when no cap applies.
pub fn pesticide_cap(scenario: &ScenarioConfig, p_pre_ramp: f64, year: i32) -> Option<f64> {
    if !scenario.kind.reduces_pesticide() || year < scenario.ramp_start_year {
        return None;
    }
    Some(cap_at(scenario, p_pre_ramp, year as f64))
}

/// Cap on a continuous time axis; integer years give [`pesticide_cap`].
pub fn cap_at(scenario: &ScenarioConfig, p_pre_ramp: f64, t: f64) -> f64 {
    let anchor = scenario.pre_ramp_year() as f64;
    let span = (scenario.ramp_end_year - scenario.pre_ramp_year()) as f64;
    let progress = ((t - anchor) / span).clamp(0.0, 1.0);
    match scenario.ramp_formula {
        RampFormula::LinearReduction => p_pre_ramp * (1.0 - scenario.reduction_fraction * progress),
        RampFormula::PrintedFootnote => p_pre_ramp * progress,
    }
}

/// Subsidy budget split for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsidyTerms {
    /// Budget distributed in proportion to utilised land [EUR/yr].
    pub per_hectare_pool: f64,
    /// Fixed amount paid to every active farmer on top [EUR/yr].
    pub flat_coupon: f64,
    /// Budget split equally among active farmers [EUR/yr].
    pub flat_pot: f64,
}

impl SubsidyTerms {
    pub fn for_farmer(&self, land: f64, total_land: f64, n_active: usize) -> f64 {
        land / total_land * self.per_hectare_pool + self.flat_per_farmer(n_active)
    }

    pub fn flat_per_farmer(&self, n_active: usize) -> f64 {
        self.flat_coupon + self.flat_pot / n_active as f64
    }

    pub fn per_hectare(&self, total_land: f64) -> f64 {
        self.per_hectare_pool / total_land
    }

    pub fn total_outlay(&self, n_active: usize) -> f64 {
        self.per_hectare_pool + self.flat_pot + self.flat_coupon * n_active as f64
    }
}

/// Subsidy split in force in `year`.
pub fn subsidy_terms(scenario: &ScenarioConfig, params: &ModelParams, year: i32) -> SubsidyTerms {
    let s = params.s_total;
    let baseline = SubsidyTerms {
        per_hectare_pool: s,
        flat_coupon: 0.0,
        flat_pot: 0.0,
    };
    if !scenario.policy_active(year) {
        return baseline;
    }
    match scenario.kind {
        ScenarioKind::Baseline | ScenarioKind::PesticideReduction => baseline,
        ScenarioKind::FlatSubsidy => SubsidyTerms {
            flat_coupon: scenario.flat_amount,
            ..baseline
        },
        ScenarioKind::Combined => SubsidyTerms {
            per_hectare_pool: (1.0 - scenario.theta) * s,
            flat_coupon: 0.0,
            flat_pot: scenario.theta * s,
        },
    }
}

/// End-year outcome of one reallocation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub year: i32,
    pub eps: f64,
    pub price: f64,
    pub mean_farm_size: f64,
    pub n_active: f64,
    pub subsidy_per_farmer: f64,
    pub subsidy_per_hectare: f64,
    /// Flat per-farmer payment in the first policy year.
    pub subsidy_per_farmer_at_start: f64,
}

/// Runs the combined scenario for every `theta` in the grid and reports the
/// Monte Carlo mean outcome in the final simulated year.
pub fn theta_sweep(
    params: &ModelParams,
    base: &ScenarioConfig,
    histogram: &SizeHistogram,
    theta_grid: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    for &theta in theta_grid {
        if !(0.0..1.0).contains(&theta) {
            return Err(ModelError::InvalidScenario(format!(
                "sweep value {theta} outside [0, 1)"
            )));
        }
    }
    theta_grid
        .par_iter()
        .map(|&theta| {
            let scenario = ScenarioConfig {
                kind: ScenarioKind::Combined,
                theta,
                ..base.clone()
            };
            let run = run_scenario(params, &scenario, histogram, seeds)?;
            let last: &YearFrame = run.mean.last().ok_or(ModelError::SectorCollapse)?;
            let start = run
                .mean
                .iter()
                .find(|f| f.year == scenario.ramp_start_year)
                .map(|f| f.subsidy_per_farmer)
                .unwrap_or(f64::NAN);
            Ok(SweepRow {
                theta,
                year: last.year,
                eps: last.eps,
                price: last.price,
                mean_farm_size: last.mean_farm_size,
                n_active: last.n_active,
                subsidy_per_farmer: last.subsidy_per_farmer,
                subsidy_per_hectare: last.subsidy_per_hectare,
                subsidy_per_farmer_at_start: start,
            })
        })
        .collect()
}
