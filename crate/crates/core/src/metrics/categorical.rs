//! Rainfall intensity categories and detection skill on daily pairs.

use super::{AbsentReason, MetricResult};
use crate::pairing::PairedDailySeries;
use crate::series::DailySeries;
use serde::Serialize;
use std::collections::BTreeMap;

/// Daily rainfall intensity class. Boundaries belong to the upper class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityCategory {
    Dry,
    Light,
    Moderate,
    Heavy,
    Violent,
}

impl IntensityCategory {
    pub const ALL: [IntensityCategory; 5] = [
        IntensityCategory::Dry,
        IntensityCategory::Light,
        IntensityCategory::Moderate,
        IntensityCategory::Heavy,
        IntensityCategory::Violent,
    ];

    pub fn code(self) -> &'static str {
        match self {
            IntensityCategory::Dry => "dry",
            IntensityCategory::Light => "light",
            IntensityCategory::Moderate => "moderate",
            IntensityCategory::Heavy => "heavy",
            IntensityCategory::Violent => "violent",
        }
    }
}

/// Lower bound of the lightest rain class; a day at or above it is a rain day.
pub const LIGHT_MIN_MM: f64 = 0.85;
pub const MODERATE_MIN_MM: f64 = 5.0;
pub const HEAVY_MIN_MM: f64 = 20.0;
pub const VIOLENT_MIN_MM: f64 = 40.0;

/// Classifies a daily depth.
///
/// Negative depths are a contract violation — QC removes them upstream —
/// and panic here.
pub fn classify_intensity(mm: f64) -> IntensityCategory {
    assert!(mm >= 0.0, "rainfall depth must be non-negative, got {mm}");
    if mm < LIGHT_MIN_MM {
        IntensityCategory::Dry
    } else if mm < MODERATE_MIN_MM {
        IntensityCategory::Light
    } else if mm < HEAVY_MIN_MM {
        IntensityCategory::Moderate
    } else if mm < VIOLENT_MIN_MM {
        IntensityCategory::Heavy
    } else {
        IntensityCategory::Violent
    }
}

/// Binary rain-day detection counts over a set of paired days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ContingencyTable {
    pub hits: u64,
    pub misses: u64,
    pub false_alarms: u64,
    pub correct_negatives: u64,
}

impl ContingencyTable {
    /// Total paired days; the four cells always partition the input.
    pub fn n(&self) -> u64 {
        self.hits + self.misses + self.false_alarms + self.correct_negatives
    }

    /// Probability of detection: hits / (hits + misses).
    pub fn pod(&self) -> MetricResult {
        let events = self.hits + self.misses;
        if events == 0 {
            return Err(AbsentReason::NoObservedEvents);
        }
        Ok(self.hits as f64 / events as f64)
    }

    /// Cells normalized by total paired days (stacked-bar semantics);
    /// `None` for an empty table.
    pub fn proportions(&self) -> Option<DetectionProportions> {
        let n = self.n();
        if n == 0 {
            return None;
        }
        let n = n as f64;
        Some(DetectionProportions {
            hit: self.hits as f64 / n,
            miss: self.misses as f64 / n,
            false_alarm: self.false_alarms as f64 / n,
            correct_negative: self.correct_negatives as f64 / n,
        })
    }
}

/// Contingency cells as fractions of all paired days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionProportions {
    pub hit: f64,
    pub miss: f64,
    pub false_alarm: f64,
    pub correct_negative: f64,
}

/// Counts rain-day detection outcomes from raw paired values.
pub fn rain_day_contingency_values(
    gauge: &[f64],
    product: &[f64],
    threshold: f64,
) -> ContingencyTable {
    assert_eq!(gauge.len(), product.len(), "paired vectors must match");
    assert!(threshold > 0.0, "rain-day threshold must be positive");
    let mut table = ContingencyTable::default();
    for (g, p) in gauge.iter().zip(product) {
        match (*g >= threshold, *p >= threshold) {
            (true, true) => table.hits += 1,
            (true, false) => table.misses += 1,
            (false, true) => table.false_alarms += 1,
            (false, false) => table.correct_negatives += 1,
        }
    }
    table
}

/// Counts rain-day detection outcomes over a paired series.
pub fn rain_day_contingency(pairs: &PairedDailySeries, threshold: f64) -> ContingencyTable {
    rain_day_contingency_values(&pairs.gauge_values(), &pairs.product_values(), threshold)
}

/// Detection rate of one observed category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryDetection {
    pub pod: f64,
    pub n_observed: u64,
}

/// Per-category probability of detection: the fraction of days observed in a
/// category that the product placed in the same category. Categories never
/// observed are absent from the map.
pub fn category_pod(pairs: &PairedDailySeries) -> BTreeMap<IntensityCategory, CategoryDetection> {
    let mut observed: BTreeMap<IntensityCategory, u64> = BTreeMap::new();
    let mut matched: BTreeMap<IntensityCategory, u64> = BTreeMap::new();
    for day in pairs.days() {
        let obs = classify_intensity(day.gauge_mm);
        *observed.entry(obs).or_default() += 1;
        if classify_intensity(day.product_mm) == obs {
            *matched.entry(obs).or_default() += 1;
        }
    }
    observed
        .into_iter()
        .map(|(category, n_observed)| {
            let hits = matched.get(&category).copied().unwrap_or(0);
            (
                category,
                CategoryDetection {
                    pod: hits as f64 / n_observed as f64,
                    n_observed,
                },
            )
        })
        .collect()
}

/// How the product classified days of one observed category.
///
/// For a rainy observed category: `true_hit` is the same class, `true_miss`
/// is a product dry day, `lower`/`higher` are strictly lower/higher rainy
/// classes. For observed dry days, any product rain counts as `higher`.
/// The four fractions sum to 1 for every category with observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeFractions {
    pub true_hit: f64,
    pub true_miss: f64,
    pub lower: f64,
    pub higher: f64,
    pub n_observed: u64,
}

/// Per observed category outcome fractions.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CategoryOutcome {
    pub rows: BTreeMap<IntensityCategory, OutcomeFractions>,
}

pub fn category_outcome_decomposition(pairs: &PairedDailySeries) -> CategoryOutcome {
    #[derive(Default)]
    struct Counts {
        true_hit: u64,
        true_miss: u64,
        lower: u64,
        higher: u64,
        n: u64,
    }
    let mut counts: BTreeMap<IntensityCategory, Counts> = BTreeMap::new();
    for day in pairs.days() {
        let obs = classify_intensity(day.gauge_mm);
        let prod = classify_intensity(day.product_mm);
        let c = counts.entry(obs).or_default();
        c.n += 1;
        if prod == obs {
            c.true_hit += 1;
        } else if prod == IntensityCategory::Dry {
            c.true_miss += 1;
        } else if prod < obs {
            c.lower += 1;
        } else {
            c.higher += 1;
        }
    }
    CategoryOutcome {
        rows: counts
            .into_iter()
            .map(|(category, c)| {
                let n = c.n as f64;
                (
                    category,
                    OutcomeFractions {
                        true_hit: c.true_hit as f64 / n,
                        true_miss: c.true_miss as f64 / n,
                        lower: c.lower as f64 / n,
                        higher: c.higher as f64 / n,
                        n_observed: c.n,
                    },
                )
            })
            .collect(),
    }
}

/// Percentage share of each rainy category among a gauge's rain days.
///
/// Dry days are excluded; percentages sum to 100 up to rounding. Absent when
/// the series has no rain day.
pub fn observed_category_distribution(
    series: &DailySeries,
) -> Result<BTreeMap<IntensityCategory, f64>, AbsentReason> {
    let mut counts: BTreeMap<IntensityCategory, u64> = BTreeMap::new();
    let mut total = 0u64;
    for (_, value) in series.observed_days() {
        let category = classify_intensity(value);
        if category != IntensityCategory::Dry {
            *counts.entry(category).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(AbsentReason::NoRainDays);
    }
    Ok(counts
        .into_iter()
        .map(|(c, n)| (c, 100.0 * n as f64 / total as f64))
        .collect())
}
