//! Gauge/product alignment, water-year assignment, and annual summaries.

use crate::series::DailySeries;
use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Default minimum number of non-missing days for a year to count.
pub const DEFAULT_MIN_VALID_DAYS: usize = 355;

#[derive(Debug, Error)]
pub enum PairingError {
    #[error("year convention start month must be in 1..=12, got {0}")]
    BadStartMonth(u32),
}

/// Which month opens the accounting year.
///
/// Month 1 is the calendar year; month 8 is the southern-Africa water year,
/// which keeps one wet season inside a single year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearConvention {
    start_month: u32,
}

impl Default for YearConvention {
    fn default() -> Self {
        YearConvention::CALENDAR
    }
}

impl YearConvention {
    pub const CALENDAR: YearConvention = YearConvention { start_month: 1 };

    pub fn new(start_month: u32) -> Result<Self, PairingError> {
        if (1..=12).contains(&start_month) {
            Ok(YearConvention { start_month })
        } else {
            Err(PairingError::BadStartMonth(start_month))
        }
    }

    pub fn start_month(self) -> u32 {
        self.start_month
    }

    /// Year label of a date: the calendar year in which the accounting year
    /// begins. With start month 8, Aug 1 of year Y through Jul 31 of Y+1 all
    /// map to Y.
    pub fn assign_year(self, date: NaiveDate) -> i32 {
        if date.month() >= self.start_month {
            date.year()
        } else {
            date.year() - 1
        }
    }
}

/// Convenience form of [`YearConvention::assign_year`].
pub fn assign_year(date: NaiveDate, convention: YearConvention) -> i32 {
    convention.assign_year(date)
}

/// One station/product day pair, both sides observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedDay {
    pub date: NaiveDate,
    pub gauge_mm: f64,
    pub product_mm: f64,
}

/// Gauge and product series restricted to mutually non-missing days.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDailySeries {
    pub station_id: String,
    pub product_id: String,
    days: Vec<PairedDay>,
}

impl PairedDailySeries {
    pub fn days(&self) -> &[PairedDay] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn gauge_values(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.gauge_mm).collect()
    }

    pub fn product_values(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.product_mm).collect()
    }
}

/// Intersects two series on days observed in both; flagged days count as
/// missing. An empty intersection is a valid, empty result.
pub fn align(
    gauge: &DailySeries,
    product: &DailySeries,
    product_id: impl Into<String>,
) -> PairedDailySeries {
    let start = gauge.start_date().max(product.start_date());
    let end = gauge.end_date().min(product.end_date());
    let mut days = Vec::new();
    let mut date = start;
    while date <= end {
        if let (Some(g), Some(p)) = (
            gauge.get(date).and_then(|s| s.observed()),
            product.get(date).and_then(|s| s.observed()),
        ) {
            days.push(PairedDay {
                date,
                gauge_mm: g,
                product_mm: p,
            });
        }
        match date.succ_opt() {
            Some(next) => date = next,
            None => break,
        }
    }
    PairedDailySeries {
        station_id: gauge.station_id().to_string(),
        product_id: product_id.into(),
        days,
    }
}

/// Totals and rain-day statistics of one accounting year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnualSummary {
    /// Calendar year in which the accounting year begins.
    pub year_label: i32,
    pub total_rain: f64,
    /// Days at or above the rain-day threshold.
    pub rain_days: u32,
    /// Mean depth over rain days; absent when there were none.
    pub mean_rain_per_rain_day: Option<f64>,
    /// Non-missing days in the year.
    pub n_valid_days: u32,
    /// Whether the year meets the minimum-days rule.
    pub valid: bool,
}

/// One summary per accounting year touched by the series.
///
/// Totals and counts use observed days only; a year needs `min_days`
/// non-missing days (inclusive) to be marked valid.
pub fn annual_summaries(
    series: &DailySeries,
    threshold: f64,
    convention: YearConvention,
    min_days: usize,
) -> Vec<AnnualSummary> {
    assert!(threshold > 0.0, "rain-day threshold must be positive");

    #[derive(Default)]
    struct YearAgg {
        total: f64,
        rain_days: u32,
        rain_total: f64,
        n_valid: u32,
    }
    let mut years: BTreeMap<i32, YearAgg> = BTreeMap::new();
    // Materialize every year the series extent touches, observed or not.
    let first = convention.assign_year(series.start_date());
    let last = convention.assign_year(series.end_date());
    for label in first..=last {
        years.entry(label).or_default();
    }
    for (date, value) in series.observed_days() {
        let agg = years
            .entry(convention.assign_year(date))
            .or_default();
        agg.total += value;
        agg.n_valid += 1;
        if value >= threshold {
            agg.rain_days += 1;
            agg.rain_total += value;
        }
    }

    years
        .into_iter()
        .map(|(year_label, agg)| AnnualSummary {
            year_label,
            total_rain: agg.total,
            rain_days: agg.rain_days,
            mean_rain_per_rain_day: if agg.rain_days > 0 {
                Some(agg.rain_total / agg.rain_days as f64)
            } else {
                None
            },
            n_valid_days: agg.n_valid,
            valid: agg.n_valid as usize >= min_days,
        })
        .collect()
}

/// Which annual summary a score refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryKind {
    TotalMm,
    RainDays,
    MeanPerRainDay,
}

impl SummaryKind {
    pub const ALL: [SummaryKind; 3] = [
        SummaryKind::TotalMm,
        SummaryKind::RainDays,
        SummaryKind::MeanPerRainDay,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SummaryKind::TotalMm => "total_mm",
            SummaryKind::RainDays => "rain_days",
            SummaryKind::MeanPerRainDay => "mean_per_rain_day",
        }
    }
}

/// Year-aligned gauge/product vectors, one per summary kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairedAnnual {
    pub totals: Vec<(i32, f64, f64)>,
    pub rain_days: Vec<(i32, f64, f64)>,
    pub mean_per_rain_day: Vec<(i32, f64, f64)>,
}

impl PairedAnnual {
    pub fn for_kind(&self, kind: SummaryKind) -> &[(i32, f64, f64)] {
        match kind {
            SummaryKind::TotalMm => &self.totals,
            SummaryKind::RainDays => &self.rain_days,
            SummaryKind::MeanPerRainDay => &self.mean_per_rain_day,
        }
    }
}

/// Inner join of gauge and product summaries on the year label.
///
/// Only years valid on the gauge side enter; with `require_product_valid`
/// the minimum-days rule is applied to the product side too. The mean-per-
/// rain-day vectors keep only years where both sides had a rain day.
pub fn paired_annual(
    gauge: &[AnnualSummary],
    product: &[AnnualSummary],
    require_product_valid: bool,
) -> PairedAnnual {
    let by_year: BTreeMap<i32, &AnnualSummary> =
        product.iter().map(|s| (s.year_label, s)).collect();
    let mut out = PairedAnnual::default();
    for g in gauge {
        if !g.valid {
            continue;
        }
        let Some(p) = by_year.get(&g.year_label) else {
            continue;
        };
        if require_product_valid && !p.valid {
            continue;
        }
        out.totals.push((g.year_label, g.total_rain, p.total_rain));
        out.rain_days
            .push((g.year_label, g.rain_days as f64, p.rain_days as f64));
        if let (Some(gm), Some(pm)) = (g.mean_rain_per_rain_day, p.mean_rain_per_rain_day) {
            out.mean_per_rain_day.push((g.year_label, gm, pm));
        }
    }
    out
}
