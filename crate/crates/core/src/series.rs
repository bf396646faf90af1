//! Daily gauge series: day statuses, strict parsing, gap filling.

use chrono::{Days, NaiveDate};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Why a day was flagged by quality control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QcReason {
    ConsecutiveIdentical,
    ExtremeValue,
    SuspiciousDryMonth,
    NegativeValue,
    DuplicateDate,
}

impl QcReason {
    pub const ALL: [QcReason; 5] = [
        QcReason::ConsecutiveIdentical,
        QcReason::ExtremeValue,
        QcReason::SuspiciousDryMonth,
        QcReason::NegativeValue,
        QcReason::DuplicateDate,
    ];

    pub fn code(self) -> &'static str {
        match self {
            QcReason::ConsecutiveIdentical => "consecutive_identical",
            QcReason::ExtremeValue => "extreme_value",
            QcReason::SuspiciousDryMonth => "suspicious_dry_month",
            QcReason::NegativeValue => "negative_value",
            QcReason::DuplicateDate => "duplicate_date",
        }
    }
}

/// Status of one calendar day in a daily series.
///
/// Flagged days keep their original value for audit but count as missing in
/// every downstream computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DayStatus {
    Observed(f64),
    Missing,
    Flagged {
        reason: QcReason,
        original_value: f64,
    },
}

impl DayStatus {
    /// The usable value of this day, if any.
    pub fn observed(self) -> Option<f64> {
        match self {
            DayStatus::Observed(v) => Some(v),
            _ => None,
        }
    }

    pub fn flag_reason(self) -> Option<QcReason> {
        match self {
            DayStatus::Flagged { reason, .. } => Some(reason),
            _ => None,
        }
    }
}

/// Date-indexed daily rainfall depths over a contiguous calendar range.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    station_id: String,
    start_date: NaiveDate,
    entries: Vec<DayStatus>,
}

impl DailySeries {
    /// Builds a series from one entry per consecutive calendar day.
    ///
    /// Panics on an empty entry list; a series always covers at least one day.
    pub fn new(station_id: impl Into<String>, start_date: NaiveDate, entries: Vec<DayStatus>) -> Self {
        assert!(!entries.is_empty(), "daily series must cover at least one day");
        DailySeries {
            station_id: station_id.into(),
            start_date,
            entries,
        }
    }

    /// Builds a contiguous series from possibly sparse dated statuses;
    /// absent dates inside the range are materialized as `Missing`.
    pub fn from_map(station_id: impl Into<String>, days: &BTreeMap<NaiveDate, DayStatus>) -> Self {
        let start = *days.keys().next().expect("at least one dated entry");
        let end = *days.keys().next_back().expect("at least one dated entry");
        let len = (end - start).num_days() as usize + 1;
        let mut entries = vec![DayStatus::Missing; len];
        for (date, status) in days {
            entries[(*date - start).num_days() as usize] = *status;
        }
        DailySeries::new(station_id, start, entries)
    }

    /// Replaces the entries, keeping identity and start date.
    pub(crate) fn with_entries(&self, entries: Vec<DayStatus>) -> Self {
        assert_eq!(entries.len(), self.entries.len());
        DailySeries {
            station_id: self.station_id.clone(),
            start_date: self.start_date,
            entries,
        }
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one day
    }

    pub fn entries(&self) -> &[DayStatus] {
        &self.entries
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date
            .checked_add_days(Days::new(index as u64))
            .expect("date within chrono range")
    }

    /// Status at a date, or `None` outside the covered range.
    pub fn get(&self, date: NaiveDate) -> Option<DayStatus> {
        let offset = (date - self.start_date).num_days();
        if offset < 0 {
            return None;
        }
        self.entries.get(offset as usize).copied()
    }

    /// Iterates `(date, status)` over the full range.
    pub fn days(&self) -> impl Iterator<Item = (NaiveDate, DayStatus)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, s)| (self.date_at(i), *s))
    }

    /// Iterates `(date, value)` over observed days only.
    pub fn observed_days(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.days().filter_map(|(d, s)| s.observed().map(|v| (d, v)))
    }

    pub fn n_observed(&self) -> usize {
        self.entries.iter().filter(|s| s.observed().is_some()).count()
    }

    /// Fraction of observed days over `period` (inclusive), defaulting to the
    /// series' own extent. Days outside the stored range count as missing.
    pub fn observed_fraction(&self, period: Option<(NaiveDate, NaiveDate)>) -> f64 {
        let (a, b) = period.unwrap_or((self.start_date, self.end_date()));
        let total = (b - a).num_days() + 1;
        if total <= 0 {
            return 0.0;
        }
        let observed = self
            .days()
            .filter(|(d, s)| *d >= a && *d <= b && s.observed().is_some())
            .count();
        observed as f64 / total as f64
    }
}

/// A non-fatal problem on one input row, reported alongside the parsed series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("daily series: bad header, expected `date,rain_mm`, got `{0}`")]
    Header(String),
    #[error("daily series: no parseable rows")]
    NoData,
    #[error("daily series: {0}")]
    Csv(#[from] csv::Error),
}

/// Tokens that mean "no observation" in a value column.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub missing_tokens: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            missing_tokens: ["", "NA", "NaN", "-99", "-99.9"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl ParseOptions {
    fn is_missing(&self, token: &str) -> bool {
        self.missing_tokens.iter().any(|t| t == token)
    }
}

/// Parses a daily series CSV (`date,rain_mm`, ISO-8601 dates) into a
/// contiguous [`DailySeries`].
///
/// Row-level problems (unparseable dates or values, negative depths) are
/// collected as [`RowIssue`]s rather than aborting; negative depths enter the
/// series pre-flagged [`QcReason::NegativeValue`]. Dates that appear more
/// than once are flagged [`QcReason::DuplicateDate`], keeping the first
/// parsed value for audit, and every extra occurrence is reported.
pub fn parse_daily_series(
    raw: &str,
    station_id: &str,
    options: &ParseOptions,
) -> Result<(DailySeries, Vec<RowIssue>), SeriesError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(raw.as_bytes());

    let header = reader.headers()?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != ["date", "rain_mm"] {
        return Err(SeriesError::Header(got.join(",")));
    }

    let mut issues = Vec::new();
    let mut days: BTreeMap<NaiveDate, DayStatus> = BTreeMap::new();

    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        let date_field = record.get(0).unwrap_or("");
        let value_field = record.get(1).unwrap_or("");

        let date = match NaiveDate::parse_from_str(date_field, "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                issues.push(RowIssue {
                    line,
                    message: format!("unparseable date `{date_field}`"),
                });
                continue;
            }
        };

        let status = if options.is_missing(value_field) {
            DayStatus::Missing
        } else {
            match value_field.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => DayStatus::Observed(v),
                Ok(v) if v.is_finite() => {
                    issues.push(RowIssue {
                        line,
                        message: format!("negative rainfall {v} mm"),
                    });
                    DayStatus::Flagged {
                        reason: QcReason::NegativeValue,
                        original_value: v,
                    }
                }
                _ => {
                    issues.push(RowIssue {
                        line,
                        message: format!("unparseable value `{value_field}`"),
                    });
                    DayStatus::Missing
                }
            }
        };

        match days.get(&date) {
            None => {
                days.insert(date, status);
            }
            Some(existing) => {
                // Keep the first parsed depth as the audit value.
                let original_value = match existing {
                    DayStatus::Observed(v) => *v,
                    DayStatus::Flagged { original_value, .. } => *original_value,
                    DayStatus::Missing => status.observed().unwrap_or(0.0),
                };
                issues.push(RowIssue {
                    line,
                    message: format!("duplicate date {date}"),
                });
                days.insert(
                    date,
                    DayStatus::Flagged {
                        reason: QcReason::DuplicateDate,
                        original_value,
                    },
                );
            }
        }
    }

    if days.is_empty() {
        return Err(SeriesError::NoData);
    }
    Ok((DailySeries::from_map(station_id, &days), issues))
}
