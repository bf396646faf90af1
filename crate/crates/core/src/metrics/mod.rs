//! Skill scores: continuous agreement on annual summaries and categorical
//! detection skill on daily pairs.

mod categorical;
mod continuous;

pub use categorical::{
    category_outcome_decomposition, category_pod, classify_intensity,
    observed_category_distribution, rain_day_contingency, rain_day_contingency_values,
    CategoryDetection, CategoryOutcome, ContingencyTable, DetectionProportions,
    IntensityCategory, OutcomeFractions,
};
pub use continuous::{mean_error, pbias, pearson_r, rsd, ContinuousScores};

use serde::Serialize;

/// Why a metric could not be computed. Reports distinguish "no skill" from
/// "not computable", so undefined metrics carry a reason instead of a NaN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsentReason {
    NoPairs,
    TooFewPairs,
    ZeroGaugeSum,
    ZeroGaugeVariance,
    ZeroProductVariance,
    NoObservedEvents,
    NoRainDays,
    InsufficientJointYears,
}

impl AbsentReason {
    pub fn code(self) -> &'static str {
        match self {
            AbsentReason::NoPairs => "no_pairs",
            AbsentReason::TooFewPairs => "too_few_pairs",
            AbsentReason::ZeroGaugeSum => "zero_gauge_sum",
            AbsentReason::ZeroGaugeVariance => "zero_gauge_variance",
            AbsentReason::ZeroProductVariance => "zero_product_variance",
            AbsentReason::NoObservedEvents => "no_observed_events",
            AbsentReason::NoRainDays => "no_rain_days",
            AbsentReason::InsufficientJointYears => "insufficient_joint_years",
        }
    }
}

impl std::fmt::Display for AbsentReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// A metric value or the reason it is absent.
pub type MetricResult = Result<f64, AbsentReason>;
