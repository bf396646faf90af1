//! Shared oracles and synthetic-data builders for the integration suites.
//!
//! The metric oracles are deliberately naive index-loop translations of the
//! defining formulas, independent of the library's implementation path.

#![allow(dead_code)]

use chrono::{Datelike, NaiveDate};
use rainval::pairing::YearConvention;
use rainval::seasonal::day_index_365;
use rainval::series::{DailySeries, DayStatus};
use rand::Rng;
use std::path::{Path, PathBuf};

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

// ---- independent metric oracles ----

pub fn oracle_me(product: &[f64], gauge: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..product.len() {
        acc += product[i] - gauge[i];
    }
    acc / product.len() as f64
}

pub fn oracle_pbias(product: &[f64], gauge: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut total = 0.0;
    for i in 0..product.len() {
        diff += product[i] - gauge[i];
        total += gauge[i];
    }
    diff / total * 100.0
}

pub fn oracle_r(product: &[f64], gauge: &[f64]) -> f64 {
    let n = product.len() as f64;
    let mut mean_s = 0.0;
    let mut mean_o = 0.0;
    for i in 0..product.len() {
        mean_s += product[i];
        mean_o += gauge[i];
    }
    mean_s /= n;
    mean_o /= n;
    let mut num = 0.0;
    let mut ss = 0.0;
    let mut so = 0.0;
    for i in 0..product.len() {
        num += (product[i] - mean_s) * (gauge[i] - mean_o);
        ss += (product[i] - mean_s) * (product[i] - mean_s);
        so += (gauge[i] - mean_o) * (gauge[i] - mean_o);
    }
    num / (ss * so).sqrt()
}

pub fn oracle_rsd(product: &[f64], gauge: &[f64]) -> f64 {
    fn std_dev(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mut mean = 0.0;
        for v in values {
            mean += v;
        }
        mean /= n;
        let mut ss = 0.0;
        for v in values {
            ss += (v - mean) * (v - mean);
        }
        (ss / (n - 1.0)).sqrt()
    }
    std_dev(product) / std_dev(gauge)
}

/// Relative agreement to `tol`; equal values (including both zero) pass.
pub fn assert_rel_close(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = actual.abs().max(expected.abs());
    assert!(
        (actual - expected).abs() <= tol * scale,
        "{what}: {actual} vs {expected} (rel tol {tol})"
    );
}

// ---- synthetic daily series ----

/// Unit exponential via inversion.
pub fn exp_sample(rng: &mut impl Rng, mean: f64) -> f64 {
    let u: f64 = rng.random();
    -mean * (1.0 - u).max(1e-12).ln()
}

/// A seasonal gauge record: wet-day probability follows a one-harmonic
/// cycle, wet depths are exponential above the rain-day boundary, all
/// values quantized to 0.1 mm (typical gauge resolution, and safely away
/// from the intensity-category boundaries).
pub fn seasonal_gauge(
    station_id: &str,
    start: NaiveDate,
    years: usize,
    convention: YearConvention,
    rng: &mut impl Rng,
) -> DailySeries {
    let mut entries = Vec::new();
    let mut d = start;
    let end = date(start.year() + years as i32, start.month(), start.day());
    while d < end {
        let t = day_index_365(d, convention) as f64;
        let arg = 2.0 * std::f64::consts::PI * (t - 160.0) / 365.0;
        let p_wet = 1.0 / (1.0 + (-(-0.7 + 1.8 * arg.cos())).exp());
        let wet = rng.random::<f64>() < p_wet;
        let depth = if wet {
            ((0.9 + exp_sample(rng, 7.0)) * 10.0).round() / 10.0
        } else {
            0.0
        };
        entries.push(DayStatus::Observed(depth));
        d = d.succ_opt().unwrap();
    }
    DailySeries::new(station_id, start, entries)
}

/// Copy of a gauge with 1.5 mm drizzle added on enough dry days to raise
/// the rain-day count by about 50%.
pub fn with_extra_drizzle_days(gauge: &DailySeries) -> DailySeries {
    let rain_days = gauge
        .entries()
        .iter()
        .filter(|s| matches!(s.observed(), Some(v) if v >= 0.85))
        .count();
    let dry_indices: Vec<usize> = gauge
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.observed(), Some(v) if v < 0.85))
        .map(|(i, _)| i)
        .collect();
    let extra = (rain_days / 2).min(dry_indices.len());
    let step = (dry_indices.len() / extra.max(1)).max(1);
    let mut entries = gauge.entries().to_vec();
    let mut added = 0;
    for chunk_start in (0..dry_indices.len()).step_by(step) {
        if added == extra {
            break;
        }
        let idx = dry_indices[chunk_start];
        if let DayStatus::Observed(v) = entries[idx] {
            entries[idx] = DayStatus::Observed(v + 1.5);
            added += 1;
        }
    }
    DailySeries::new(gauge.station_id(), gauge.start_date(), entries)
}

// ---- on-disk fixtures ----

pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

pub fn series_to_csv(series: &DailySeries) -> String {
    let mut out = String::from("date,rain_mm\n");
    for (d, status) in series.days() {
        match status.observed() {
            Some(v) => out.push_str(&format!("{d},{v:.1}\n")),
            None => out.push_str(&format!("{d},NA\n")),
        }
    }
    out
}

/// Builds a one-row grid whose columns carry the given series (one station
/// per cell), returning descriptor JSON and payload bytes.
pub fn grid_from_series(
    series_list: &[&DailySeries],
    lat: f64,
    lon0: f64,
    dlon: f64,
) -> (String, Vec<u8>) {
    let ntime = series_list[0].len();
    assert!(series_list.iter().all(|s| s.len() == ntime));
    let descriptor = serde_json::json!({
        "lat0": lat,
        "lon0": lon0,
        "dlat": 1.0,
        "dlon": dlon,
        "nlat": 1,
        "nlon": series_list.len(),
        "time_start": series_list[0].start_date().to_string(),
        "ntime": ntime,
        "missing_sentinel": -999.0,
    });
    let mut payload = Vec::with_capacity(ntime * series_list.len() * 4);
    for t in 0..ntime {
        for series in series_list {
            let v = match series.entries()[t].observed() {
                Some(v) => v as f32,
                None => -999.0,
            };
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    (serde_json::to_string_pretty(&descriptor).unwrap(), payload)
}

pub fn station_table_csv(rows: &[(&str, &str, f64, f64)]) -> String {
    let mut out = String::from(
        "country,name,latitude,longitude,elevation,start_year,end_year,complete_pct\n",
    );
    for (country, name, lat, lon) in rows {
        out.push_str(&format!("{country},{name},{lat},{lon},1000,1983,2023,99.0\n"));
    }
    out
}
