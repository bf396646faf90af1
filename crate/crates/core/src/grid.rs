//! Gridded rainfall products: on-disk format, loading, and nearest-pixel
//! extraction.
//!
//! A product is stored as a JSON descriptor plus a flat little-endian f32
//! payload in row-major `(time, lat, lon)` order. The format is trivially
//! producible from any real archive with a one-line external conversion,
//! which keeps the toolkit free of heavyweight format decoders.

use crate::series::{DailySeries, DayStatus};
use crate::station::StationMeta;
use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Mean Earth radius used for great-circle distances, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputsClass {
    Satellite,
    #[serde(rename = "satellite+gauge")]
    SatelliteGauge,
    Reanalysis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalResolution {
    Daily,
}

/// Catalog entry for one rainfall product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductMeta {
    pub product_id: String,
    pub inputs_class: InputsClass,
    pub spatial_resolution_deg: f64,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub temporal_resolution: TemporalResolution,
}

/// Geometry and time axis of a regular lat/lon grid.
///
/// `lat0`/`lon0` are the cell centers of the first row and column; rows run
/// in increasing latitude, columns in increasing longitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDescriptor {
    pub lat0: f64,
    pub lon0: f64,
    pub dlat: f64,
    pub dlon: f64,
    pub nlat: usize,
    pub nlon: usize,
    pub time_start: NaiveDate,
    pub ntime: usize,
    pub missing_sentinel: f64,
}

impl GridDescriptor {
    pub fn validate(&self) -> Result<(), GridError> {
        let fail = |message: String| Err(GridError::InvalidDescriptor(message));
        if self.dlat <= 0.0 || self.dlon <= 0.0 || self.dlat.is_nan() || self.dlon.is_nan() {
            return fail(format!(
                "cell spacing must be positive, got dlat={} dlon={}",
                self.dlat, self.dlon
            ));
        }
        if self.nlat == 0 || self.nlon == 0 || self.ntime == 0 {
            return fail("grid dimensions must be at least 1".into());
        }
        let lat_last = self.lat0 + (self.nlat - 1) as f64 * self.dlat;
        let lon_last = self.lon0 + (self.nlon - 1) as f64 * self.dlon;
        if self.lat0 < -90.0 || lat_last > 90.0 {
            return fail(format!(
                "latitude domain [{}, {lat_last}] outside [-90, 90]",
                self.lat0
            ));
        }
        if self.lon0 < -180.0 || lon_last > 180.0 {
            return fail(format!(
                "longitude domain [{}, {lon_last}] outside [-180, 180]",
                self.lon0
            ));
        }
        if !self.missing_sentinel.is_finite() {
            return fail("missing_sentinel must be finite".into());
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn lat_at(&self, row: usize) -> f64 {
        self.lat0 + row as f64 * self.dlat
    }

    pub fn lon_at(&self, col: usize) -> f64 {
        self.lon0 + col as f64 * self.dlon
    }
}

/// A loaded product: metadata, geometry, and the dense value array.
#[derive(Debug, Clone)]
pub struct GriddedProduct {
    pub meta: ProductMeta,
    pub descriptor: GridDescriptor,
    values: Vec<f32>,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("grid descriptor: {0}")]
    DescriptorJson(#[from] serde_json::Error),
    #[error("grid payload: expected {expected} bytes ({ntime}x{nlat}x{nlon} cells of 4 bytes), got {actual}")]
    PayloadLength {
        expected: usize,
        actual: usize,
        ntime: usize,
        nlat: usize,
        nlon: usize,
    },
    #[error("grid payload: negative value {value} at flat index {index}")]
    NegativeValue { index: usize, value: f32 },
    #[error("grid import: {0}")]
    Import(String),
    #[error("grid import: {0}")]
    Csv(#[from] csv::Error),
}

impl GriddedProduct {
    /// Loads a product from its JSON descriptor and flat f32 payload.
    ///
    /// NaN payload values are normalized to the missing sentinel. Negative
    /// non-missing values are a format error.
    pub fn load(
        product_id: impl Into<String>,
        inputs_class: InputsClass,
        descriptor_raw: &str,
        payload: &[u8],
    ) -> Result<GriddedProduct, GridError> {
        let descriptor: GridDescriptor = serde_json::from_str(descriptor_raw)?;
        descriptor.validate()?;

        let n_values = descriptor.ntime * descriptor.n_cells();
        let expected = n_values * 4;
        if payload.len() != expected {
            return Err(GridError::PayloadLength {
                expected,
                actual: payload.len(),
                ntime: descriptor.ntime,
                nlat: descriptor.nlat,
                nlon: descriptor.nlon,
            });
        }

        let sentinel = descriptor.missing_sentinel as f32;
        let mut values = Vec::with_capacity(n_values);
        for (index, chunk) in payload.chunks_exact(4).enumerate() {
            let mut v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if v.is_nan() {
                v = sentinel;
            }
            if v != sentinel && v < 0.0 {
                return Err(GridError::NegativeValue { index, value: v });
            }
            values.push(v);
        }

        let period_end = descriptor
            .time_start
            .checked_add_days(Days::new(descriptor.ntime as u64 - 1))
            .expect("date within chrono range");
        let meta = ProductMeta {
            product_id: product_id.into(),
            inputs_class,
            spatial_resolution_deg: descriptor.dlat,
            period_start: descriptor.time_start,
            period_end,
            temporal_resolution: TemporalResolution::Daily,
        };
        Ok(GriddedProduct {
            meta,
            descriptor,
            values,
        })
    }

    /// Raw cell value at `(time, row, col)`; the sentinel means missing.
    pub fn raw_value(&self, time: usize, row: usize, col: usize) -> f32 {
        let d = &self.descriptor;
        self.values[time * d.n_cells() + row * d.nlon + col]
    }

    /// Usable value at `(time, row, col)`, `None` when missing.
    pub fn value(&self, time: usize, row: usize, col: usize) -> Option<f64> {
        let v = self.raw_value(time, row, col);
        if v == self.descriptor.missing_sentinel as f32 {
            None
        } else {
            Some(v as f64)
        }
    }

    /// Serializes the payload back to little-endian bytes.
    pub fn write_payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 4);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Canonical descriptor JSON (pretty-printed, fixed field order).
    pub fn write_descriptor(&self) -> String {
        serde_json::to_string_pretty(&self.descriptor).expect("descriptor serializes")
    }
}

/// Great-circle distance between two points, km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2)
        + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// The grid cell whose center is closest (great-circle) to a point.
///
/// Ties go to the smaller row index, then the smaller column index. Points
/// outside the grid domain map to the closest boundary cell.
pub fn nearest_cell(descriptor: &GridDescriptor, lat: f64, lon: f64) -> (usize, usize, f64) {
    debug_assert!((-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon));
    let mut best = (0usize, 0usize, f64::INFINITY);
    for row in 0..descriptor.nlat {
        let clat = descriptor.lat_at(row);
        for col in 0..descriptor.nlon {
            let d = haversine_km(lat, lon, clat, descriptor.lon_at(col));
            if d < best.2 {
                best = (row, col, d);
            }
        }
    }
    best
}

/// Result of extracting a station's nearest-pixel series.
#[derive(Debug, Clone)]
pub enum ExtractionResult {
    Series {
        series: DailySeries,
        cell_lat_index: usize,
        cell_lon_index: usize,
        distance_km: f64,
    },
    Excluded {
        reason: String,
    },
}

/// Builds the daily series of the product cell nearest to a station.
///
/// The cell is rejected when its missing fraction exceeds
/// `max_missing_fraction`; an all-missing cell (a sea pixel, say) is always
/// rejected, so the default of 1.0 excludes only those.
pub fn extract_point_series(
    product: &GriddedProduct,
    station: &StationMeta,
    max_missing_fraction: f64,
) -> ExtractionResult {
    let (row, col, distance_km) =
        nearest_cell(&product.descriptor, station.latitude, station.longitude);
    let ntime = product.descriptor.ntime;
    let mut entries = Vec::with_capacity(ntime);
    let mut n_missing = 0usize;
    for t in 0..ntime {
        match product.value(t, row, col) {
            Some(v) => entries.push(DayStatus::Observed(v)),
            None => {
                n_missing += 1;
                entries.push(DayStatus::Missing);
            }
        }
    }
    let missing_fraction = n_missing as f64 / ntime as f64;
    if missing_fraction >= 1.0 {
        return ExtractionResult::Excluded {
            reason: "nearest pixel has no data".into(),
        };
    }
    if missing_fraction > max_missing_fraction {
        return ExtractionResult::Excluded {
            reason: format!(
                "nearest pixel missing fraction {missing_fraction:.3} exceeds {max_missing_fraction:.3}"
            ),
        };
    }
    ExtractionResult::Series {
        series: DailySeries::new(
            station.station_id.clone(),
            product.descriptor.time_start,
            entries,
        ),
        cell_lat_index: row,
        cell_lon_index: col,
        distance_km,
    }
}

/// Builds a descriptor and payload from long-format CSV
/// (`date,lat,lon,value`) — intended for small hand-written test grids.
///
/// Coordinates must form a uniformly spaced lattice; the time axis is
/// materialized from the earliest to the latest date with absent
/// `(date,cell)` combinations set to the sentinel. A single row or column of
/// cells gets a nominal 1-degree spacing.
pub fn import_long_csv(
    raw: &str,
    missing_sentinel: f64,
    missing_tokens: &[String],
) -> Result<(GridDescriptor, Vec<u8>), GridError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != ["date", "lat", "lon", "value"] {
        return Err(GridError::Import(format!(
            "bad header, expected `date,lat,lon,value`, got `{}`",
            header.join(",")
        )));
    }

    struct Row {
        date: NaiveDate,
        lat: f64,
        lon: f64,
        value: f32,
    }
    let mut rows: Vec<Row> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        let date = NaiveDate::parse_from_str(record.get(0).unwrap_or(""), "%Y-%m-%d")
            .map_err(|_| GridError::Import(format!("line {line}: unparseable date")))?;
        let lat: f64 = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| GridError::Import(format!("line {line}: unparseable lat")))?;
        let lon: f64 = record
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| GridError::Import(format!("line {line}: unparseable lon")))?;
        let value_field = record.get(3).unwrap_or("");
        let value = if missing_tokens.iter().any(|t| t == value_field) {
            missing_sentinel as f32
        } else {
            value_field
                .parse()
                .map_err(|_| GridError::Import(format!("line {line}: unparseable value")))?
        };
        rows.push(Row {
            date,
            lat,
            lon,
            value,
        });
    }
    if rows.is_empty() {
        return Err(GridError::Import("no data rows".into()));
    }

    let mut lats: Vec<f64> = rows.iter().map(|r| r.lat).collect();
    let mut lons: Vec<f64> = rows.iter().map(|r| r.lon).collect();
    lats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lats.dedup();
    lons.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lons.dedup();
    let dlat = uniform_spacing(&lats, "lat")?;
    let dlon = uniform_spacing(&lons, "lon")?;

    let time_start = rows.iter().map(|r| r.date).min().expect("non-empty");
    let time_end = rows.iter().map(|r| r.date).max().expect("non-empty");
    let ntime = (time_end - time_start).num_days() as usize + 1;

    let descriptor = GridDescriptor {
        lat0: lats[0],
        lon0: lons[0],
        dlat,
        dlon,
        nlat: lats.len(),
        nlon: lons.len(),
        time_start,
        ntime,
        missing_sentinel,
    };
    descriptor.validate()?;

    let index_of = |coords: &[f64], v: f64| -> usize {
        coords
            .iter()
            .position(|c| (c - v).abs() < 1e-9)
            .expect("coordinate from the same list")
    };
    let n_cells = descriptor.n_cells();
    let mut values = vec![missing_sentinel as f32; ntime * n_cells];
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for (row_no, row) in rows.iter().enumerate() {
        let t = (row.date - time_start).num_days() as usize;
        let i = index_of(&lats, row.lat);
        let j = index_of(&lons, row.lon);
        let flat = t * n_cells + i * descriptor.nlon + j;
        if let Some(first) = seen.insert(flat, row_no + 2) {
            return Err(GridError::Import(format!(
                "line {}: duplicate (date, lat, lon), first seen at line {first}",
                row_no + 2
            )));
        }
        values[flat] = row.value;
    }

    let mut payload = Vec::with_capacity(values.len() * 4);
    for v in &values {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    Ok((descriptor, payload))
}

fn uniform_spacing(coords: &[f64], axis: &str) -> Result<f64, GridError> {
    if coords.len() < 2 {
        return Ok(1.0);
    }
    let d = coords[1] - coords[0];
    for w in coords.windows(2) {
        if ((w[1] - w[0]) - d).abs() > 1e-6 {
            return Err(GridError::Import(format!(
                "{axis} coordinates are not uniformly spaced"
            )));
        }
    }
    Ok(d)
}
