//! Per-cell climatology fields and the pixelation (blockiness) screen.
//!
//! A visually blocky product shows sharp value contrasts at tile boundaries
//! of an otherwise smooth climatology. The score below makes that check
//! reproducible: the median absolute deviation of each interior cell from
//! its 4-neighbor mean, normalized by the interquartile range of the field.
//! Smooth fields (including exact planar gradients) score near zero; tiled
//! contrast fields score high.

use crate::grid::GriddedProduct;
use crate::pairing::YearConvention;
use chrono::Days;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Minimum number of interior cells with a usable neighborhood; a 5×5
/// non-missing interior region is the smallest meaningful input.
const MIN_INTERIOR_CELLS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimatologyKind {
    MeanAnnualTotal,
    MeanAnnualRainDays,
    MeanRainPerRainDay,
}

impl ClimatologyKind {
    pub const ALL: [ClimatologyKind; 3] = [
        ClimatologyKind::MeanAnnualTotal,
        ClimatologyKind::MeanAnnualRainDays,
        ClimatologyKind::MeanRainPerRainDay,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ClimatologyKind::MeanAnnualTotal => "mean_annual_total",
            ClimatologyKind::MeanAnnualRainDays => "mean_annual_rain_days",
            ClimatologyKind::MeanRainPerRainDay => "mean_rain_per_rain_day",
        }
    }
}

/// A per-cell long-term annual summary with the time dimension collapsed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClimatologyField {
    pub lat0: f64,
    pub lon0: f64,
    pub dlat: f64,
    pub dlon: f64,
    pub nlat: usize,
    pub nlon: usize,
    pub kind: ClimatologyKind,
    /// Row-major `(lat, lon)`; `None` marks cells with no valid year.
    pub values: Vec<Option<f64>>,
}

impl ClimatologyField {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.nlon + col]
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Suspicious,
    Inconsistent,
}

impl Verdict {
    pub fn code(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Suspicious => "suspicious",
            Verdict::Inconsistent => "inconsistent",
        }
    }
}

/// Blockiness score and the derived verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyScore {
    pub blockiness: f64,
    pub verdict: Verdict,
    pub n_cells: usize,
}

/// Verdict boundaries on the blockiness score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialThresholds {
    pub consistent_below: f64,
    pub suspicious_below: f64,
}

impl Default for SpatialThresholds {
    fn default() -> Self {
        SpatialThresholds {
            consistent_below: 0.05,
            suspicious_below: 0.15,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpatialError {
    #[error("too few usable interior cells: need {needed}, got {got}")]
    TooFewCells { needed: usize, got: usize },
}

/// Computes the long-term mean of an annual summary per grid cell.
///
/// Cell-years follow the station rule: a year needs `min_valid_days`
/// non-missing steps to count. Cells with no valid year are missing; for
/// the mean-rain-per-rain-day kind, years without a rain day contribute
/// nothing.
pub fn climatology_field(
    product: &GriddedProduct,
    kind: ClimatologyKind,
    threshold: f64,
    convention: YearConvention,
    min_valid_days: usize,
) -> ClimatologyField {
    let d = &product.descriptor;
    let mut year_of_step = Vec::with_capacity(d.ntime);
    for t in 0..d.ntime {
        let date = d
            .time_start
            .checked_add_days(Days::new(t as u64))
            .expect("date within chrono range");
        year_of_step.push(convention.assign_year(date));
    }

    #[derive(Default)]
    struct YearAgg {
        n_valid: u32,
        total: f64,
        rain_days: u32,
        rain_total: f64,
    }

    let mut values = Vec::with_capacity(d.n_cells());
    for row in 0..d.nlat {
        for col in 0..d.nlon {
            let mut years: BTreeMap<i32, YearAgg> = BTreeMap::new();
            for (t, year) in year_of_step.iter().enumerate() {
                if let Some(v) = product.value(t, row, col) {
                    let agg = years.entry(*year).or_default();
                    agg.n_valid += 1;
                    agg.total += v;
                    if v >= threshold {
                        agg.rain_days += 1;
                        agg.rain_total += v;
                    }
                }
            }
            let mut sum = 0.0;
            let mut n = 0usize;
            for agg in years.values() {
                if (agg.n_valid as usize) < min_valid_days {
                    continue;
                }
                let value = match kind {
                    ClimatologyKind::MeanAnnualTotal => Some(agg.total),
                    ClimatologyKind::MeanAnnualRainDays => Some(agg.rain_days as f64),
                    ClimatologyKind::MeanRainPerRainDay => {
                        (agg.rain_days > 0).then(|| agg.rain_total / agg.rain_days as f64)
                    }
                };
                if let Some(v) = value {
                    sum += v;
                    n += 1;
                }
            }
            values.push((n > 0).then(|| sum / n as f64));
        }
    }

    ClimatologyField {
        lat0: d.lat0,
        lon0: d.lon0,
        dlat: d.dlat,
        dlon: d.dlon,
        nlat: d.nlat,
        nlon: d.nlon,
        kind,
        values,
    }
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Scores a climatology field for pixelation artifacts.
///
/// Blockiness is the median over interior non-missing cells of
/// `|f - mean(available 4-neighbors)|`, divided by the interquartile range
/// of the field (zero when the IQR is zero). The score is invariant to
/// scaling and shifting of the field.
pub fn blockiness_score(
    field: &ClimatologyField,
    thresholds: SpatialThresholds,
) -> Result<ConsistencyScore, SpatialError> {
    let mut deviations = Vec::new();
    for row in 1..field.nlat.saturating_sub(1) {
        for col in 1..field.nlon.saturating_sub(1) {
            let Some(center) = field.get(row, col) else {
                continue;
            };
            let neighbors = [
                field.get(row - 1, col),
                field.get(row + 1, col),
                field.get(row, col - 1),
                field.get(row, col + 1),
            ];
            let available: Vec<f64> = neighbors.into_iter().flatten().collect();
            if available.is_empty() {
                continue;
            }
            let mean = available.iter().sum::<f64>() / available.len() as f64;
            deviations.push((center - mean).abs());
        }
    }
    if deviations.len() < MIN_INTERIOR_CELLS {
        return Err(SpatialError::TooFewCells {
            needed: MIN_INTERIOR_CELLS,
            got: deviations.len(),
        });
    }

    let mut all: Vec<f64> = field.values.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n_cells = all.len();
    let iqr = quantile_sorted(&all, 0.75) - quantile_sorted(&all, 0.25);

    deviations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_dev = quantile_sorted(&deviations, 0.5);
    let blockiness = if iqr == 0.0 { 0.0 } else { median_dev / iqr };

    let verdict = if blockiness < thresholds.consistent_below {
        Verdict::Consistent
    } else if blockiness < thresholds.suspicious_below {
        Verdict::Suspicious
    } else {
        Verdict::Inconsistent
    };
    Ok(ConsistencyScore {
        blockiness,
        verdict,
        n_cells,
    })
}

/// Long-format CSV (`lat,lon,value`) of a field; missing cells are skipped.
/// Values are written with six significant digits for byte-stable output.
pub fn field_to_csv(field: &ClimatologyField) -> String {
    let mut out = String::from("lat,lon,value\n");
    for row in 0..field.nlat {
        for col in 0..field.nlon {
            if let Some(v) = field.get(row, col) {
                out.push_str(&format!(
                    "{},{},{}\n",
                    crate::numfmt::fmt_sig6(field.lat0 + row as f64 * field.dlat),
                    crate::numfmt::fmt_sig6(field.lon0 + col as f64 * field.dlon),
                    crate::numfmt::fmt_sig6(v),
                ));
            }
        }
    }
    out
}

/// Color ramp endpoints for heatmaps: low `#f7fbff`, high `#08306b`,
/// missing `#d3d3d3`.
const RAMP_LOW: (u8, u8, u8) = (0xf7, 0xfb, 0xff);
const RAMP_HIGH: (u8, u8, u8) = (0x08, 0x30, 0x6b);
const MISSING_COLOR: &str = "#d3d3d3";
const CELL_PX: usize = 8;

/// Renders a field as a simple SVG heatmap with a linear color ramp between
/// the field minimum and maximum. Rows are drawn north-up.
pub fn svg_heatmap(field: &ClimatologyField) -> String {
    let present: Vec<f64> = field.values.iter().flatten().copied().collect();
    let (lo, hi) = present.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    let width = field.nlon * CELL_PX;
    let height = field.nlat * CELL_PX;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    for row in 0..field.nlat {
        for col in 0..field.nlon {
            let fill = match field.get(row, col) {
                None => MISSING_COLOR.to_string(),
                Some(v) => {
                    let s = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                    let lerp = |a: u8, b: u8| -> u8 {
                        (a as f64 + s * (b as f64 - a as f64)).round() as u8
                    };
                    format!(
                        "#{:02x}{:02x}{:02x}",
                        lerp(RAMP_LOW.0, RAMP_HIGH.0),
                        lerp(RAMP_LOW.1, RAMP_HIGH.1),
                        lerp(RAMP_LOW.2, RAMP_HIGH.2)
                    )
                }
            };
            let x = col * CELL_PX;
            let y = (field.nlat - 1 - row) * CELL_PX;
            out.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL_PX}\" height=\"{CELL_PX}\" fill=\"{fill}\"/>\n"
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}
