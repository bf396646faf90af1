//! Quality-control rules for daily gauge series and station eligibility.
//!
//! Rules run in a fixed order — negative/extreme values, then repeated
//! identical values, then suspicious dry months — and a day keeps the first
//! flag it receives. Flagged days count as missing everywhere downstream;
//! the original value is retained for audit.

use crate::series::{DailySeries, DayStatus, QcReason};
use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Parameters of the QC procedure. All values are overridable per run.
#[derive(Debug, Clone)]
pub struct QcConfig {
    /// Minimum length of a run of identical positive values to flag.
    pub min_run: usize,
    /// Runs of identical values below this depth are left alone.
    pub min_identical_value: f64,
    /// Daily depths strictly above this are flagged as extreme.
    pub max_daily_mm: f64,
    /// Months (1-12) in which an all-zero month is climatologically suspect.
    pub wet_months: BTreeSet<u32>,
    /// An all-zero wet month is flagged only when the station's mean total
    /// for that month exceeds this floor.
    pub dry_month_floor_mm: f64,
    /// Minimum number of other years of a month required before its
    /// climatology is trusted.
    pub min_station_years: usize,
    /// Minimum observed fraction for a station to stay in the analysis.
    pub eligibility_threshold: f64,
    /// Period over which eligibility is assessed; defaults to the series extent.
    pub analysis_period: Option<(NaiveDate, NaiveDate)>,
}

impl Default for QcConfig {
    fn default() -> Self {
        QcConfig {
            min_run: 5,
            min_identical_value: 1.0,
            max_daily_mm: 400.0,
            wet_months: BTreeSet::new(),
            dry_month_floor_mm: 50.0,
            min_station_years: 5,
            eligibility_threshold: 0.70,
            analysis_period: None,
        }
    }
}

/// Outcome of a QC run over one station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QcReport {
    pub station_id: String,
    /// Flagged-day count per reason; all reasons present, zeros included.
    pub counts: BTreeMap<QcReason, usize>,
    pub completeness_before: f64,
    pub completeness_after: f64,
    pub eligible: bool,
}

/// Flags observed depths above `max_daily` as extreme and negative depths
/// as invalid. The boundary value itself is kept.
pub fn qc_extremes(series: &DailySeries, max_daily: f64) -> DailySeries {
    assert!(max_daily > 0.0, "max_daily must be positive");
    let entries = series
        .entries()
        .iter()
        .map(|status| match *status {
            DayStatus::Observed(v) if v < 0.0 => DayStatus::Flagged {
                reason: QcReason::NegativeValue,
                original_value: v,
            },
            DayStatus::Observed(v) if v > max_daily => DayStatus::Flagged {
                reason: QcReason::ExtremeValue,
                original_value: v,
            },
            other => other,
        })
        .collect();
    series.with_entries(entries)
}

/// Flags maximal runs of at least `min_run` identical observed values at or
/// above `min_value`. Zeros are never flagged: dry spells are natural.
pub fn qc_consecutive_identical(
    series: &DailySeries,
    min_run: usize,
    min_value: f64,
) -> DailySeries {
    assert!(min_run >= 2, "min_run must be at least 2");
    let mut entries: Vec<DayStatus> = series.entries().to_vec();
    let n = entries.len();
    let mut start = 0;
    while start < n {
        let value = match entries[start] {
            DayStatus::Observed(v) => v,
            _ => {
                start += 1;
                continue;
            }
        };
        let mut end = start + 1;
        while end < n && entries[end] == DayStatus::Observed(value) {
            end += 1;
        }
        let run = end - start;
        if run >= min_run && value >= min_value && value > 0.0 {
            for entry in entries.iter_mut().take(end).skip(start) {
                *entry = DayStatus::Flagged {
                    reason: QcReason::ConsecutiveIdentical,
                    original_value: value,
                };
            }
        }
        start = end;
    }
    series.with_entries(entries)
}

/// Flags calendar months whose observed values are all zero, in a wet month,
/// at a station whose climatological mean for that month (from the rest of
/// the record) exceeds `floor_mm`.
///
/// Candidate months are judged against the state of the series on entry and
/// flagged together, so re-running the rule never flags anything new.
pub fn qc_dry_month(
    series: &DailySeries,
    wet_months: &BTreeSet<u32>,
    min_station_years: usize,
    floor_mm: f64,
) -> DailySeries {
    assert!(
        !wet_months.is_empty(),
        "dry-month check needs a non-empty wet-month set"
    );

    // Per (year, month): observed-day count, total depth, all-zero flag.
    #[derive(Default)]
    struct MonthAgg {
        n_observed: usize,
        total: f64,
        all_zero: bool,
    }
    let mut months: BTreeMap<(i32, u32), MonthAgg> = BTreeMap::new();
    for (date, status) in series.days() {
        if let Some(v) = status.observed() {
            let agg = months.entry((date.year(), date.month())).or_insert(MonthAgg {
                n_observed: 0,
                total: 0.0,
                all_zero: true,
            });
            agg.n_observed += 1;
            agg.total += v;
            if v != 0.0 {
                agg.all_zero = false;
            }
        }
    }

    let mut flagged_months: BTreeSet<(i32, u32)> = BTreeSet::new();
    for (&(year, month), agg) in &months {
        if agg.n_observed == 0 || !agg.all_zero || !wet_months.contains(&month) {
            continue;
        }
        let others: Vec<f64> = months
            .iter()
            .filter(|(&(y, m), other)| m == month && y != year && other.n_observed > 0)
            .map(|(_, other)| other.total)
            .collect();
        if others.len() < min_station_years {
            continue;
        }
        let mean = others.iter().sum::<f64>() / others.len() as f64;
        if mean > floor_mm {
            flagged_months.insert((year, month));
        }
    }

    let entries = series
        .days()
        .map(|(date, status)| match status {
            DayStatus::Observed(v)
                if flagged_months.contains(&(date.year(), date.month())) =>
            {
                DayStatus::Flagged {
                    reason: QcReason::SuspiciousDryMonth,
                    original_value: v,
                }
            }
            other => other,
        })
        .collect();
    series.with_entries(entries)
}

/// Runs the full QC procedure and reports flag counts and eligibility.
///
/// Completeness is the observed fraction over the configured analysis
/// period; a station at exactly the eligibility threshold stays in.
pub fn run_qc(series: &DailySeries, config: &QcConfig) -> (DailySeries, QcReport) {
    let completeness_before = series.observed_fraction(config.analysis_period);

    let mut out = qc_extremes(series, config.max_daily_mm);
    out = qc_consecutive_identical(&out, config.min_run, config.min_identical_value);
    if !config.wet_months.is_empty() {
        out = qc_dry_month(
            &out,
            &config.wet_months,
            config.min_station_years,
            config.dry_month_floor_mm,
        );
    }

    let mut counts: BTreeMap<QcReason, usize> =
        QcReason::ALL.iter().map(|r| (*r, 0)).collect();
    for status in out.entries() {
        if let Some(reason) = status.flag_reason() {
            *counts.get_mut(&reason).expect("all reasons present") += 1;
        }
    }

    let completeness_after = out.observed_fraction(config.analysis_period);
    let report = QcReport {
        station_id: out.station_id().to_string(),
        counts,
        completeness_before,
        completeness_after,
        eligible: completeness_after >= config.eligibility_threshold,
    };
    (out, report)
}
