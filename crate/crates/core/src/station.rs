//! Station metadata table parsing.
//!
//! The station table is a UTF-8 CSV with header
//! `country,name,latitude,longitude,elevation,start_year,end_year,complete_pct`.
//! The station name doubles as its identifier and must be unique within a
//! table.

use serde::Serialize;
use thiserror::Error;

/// Lowest land elevation on record (Dead Sea shore), metres.
const MIN_ELEVATION_M: f64 = -430.0;

const EXPECTED_HEADER: [&str; 8] = [
    "country",
    "name",
    "latitude",
    "longitude",
    "elevation",
    "start_year",
    "end_year",
    "complete_pct",
];

/// Identity, coordinates, elevation, and record period of a gauge station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationMeta {
    pub station_id: String,
    pub name: String,
    pub country: String,
    pub latitude: f64,
    pub longitude: f64,
    pub elevation_m: f64,
    pub period_start: i32,
    pub period_end: i32,
    /// Fraction of the record period with usable observations, in [0, 1].
    pub completeness: f64,
}

#[derive(Debug, Error)]
pub enum StationTableError {
    #[error("station table: bad header, expected `{expected}`, got `{got}`")]
    Header { expected: String, got: String },
    #[error("station table line {line}: expected {expected} fields, got {got}")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("station table line {line}, column `{column}`: {message}")]
    Parse {
        line: usize,
        column: &'static str,
        message: String,
    },
    #[error("station table line {line}, column `{column}`: {message}")]
    Validation {
        line: usize,
        column: &'static str,
        message: String,
    },
    #[error("station table line {line}: duplicate station id `{station_id}`")]
    DuplicateStation { line: usize, station_id: String },
    #[error("station table: {0}")]
    Csv(#[from] csv::Error),
}

/// Parses a station table, validating bounds and id uniqueness.
pub fn parse_station_table(raw: &str) -> Result<Vec<StationMeta>, StationTableError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(raw.as_bytes());

    let header = reader.headers()?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != EXPECTED_HEADER {
        return Err(StationTableError::Header {
            expected: EXPECTED_HEADER.join(","),
            got: got.join(","),
        });
    }

    let mut stations: Vec<StationMeta> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2; // header is line 1
        if record.len() != EXPECTED_HEADER.len() {
            return Err(StationTableError::FieldCount {
                line,
                expected: EXPECTED_HEADER.len(),
                got: record.len(),
            });
        }
        let station = parse_row(&record, line)?;
        if stations.iter().any(|s| s.station_id == station.station_id) {
            return Err(StationTableError::DuplicateStation {
                line,
                station_id: station.station_id,
            });
        }
        stations.push(station);
    }
    Ok(stations)
}

fn parse_row(record: &csv::StringRecord, line: usize) -> Result<StationMeta, StationTableError> {
    let field = |i: usize| record.get(i).unwrap_or("");
    let country = field(0).to_string();
    let name = field(1).to_string();
    if name.is_empty() {
        return Err(StationTableError::Validation {
            line,
            column: "name",
            message: "station name must not be empty".into(),
        });
    }

    let latitude = parse_f64(field(2), line, "latitude")?;
    let longitude = parse_f64(field(3), line, "longitude")?;
    let elevation_m = parse_f64(field(4), line, "elevation")?;
    let period_start = parse_i32(field(5), line, "start_year")?;
    let period_end = parse_i32(field(6), line, "end_year")?;
    let complete_pct = parse_f64(field(7), line, "complete_pct")?;

    let check = |ok: bool, column: &'static str, message: String| {
        if ok {
            Ok(())
        } else {
            Err(StationTableError::Validation {
                line,
                column,
                message,
            })
        }
    };
    check(
        (-90.0..=90.0).contains(&latitude),
        "latitude",
        format!("latitude {latitude} outside [-90, 90]"),
    )?;
    check(
        (-180.0..=180.0).contains(&longitude),
        "longitude",
        format!("longitude {longitude} outside [-180, 180]"),
    )?;
    check(
        elevation_m >= MIN_ELEVATION_M,
        "elevation",
        format!("elevation {elevation_m} below {MIN_ELEVATION_M} m"),
    )?;
    check(
        period_start <= period_end,
        "start_year",
        format!("period {period_start}-{period_end} is reversed"),
    )?;
    check(
        (0.0..=100.0).contains(&complete_pct),
        "complete_pct",
        format!("complete_pct {complete_pct} outside [0, 100]"),
    )?;

    Ok(StationMeta {
        station_id: name.clone(),
        name,
        country,
        latitude,
        longitude,
        elevation_m,
        period_start,
        period_end,
        completeness: complete_pct / 100.0,
    })
}

fn parse_f64(s: &str, line: usize, column: &'static str) -> Result<f64, StationTableError> {
    s.parse().map_err(|_| StationTableError::Parse {
        line,
        column,
        message: format!("`{s}` is not a number"),
    })
}

fn parse_i32(s: &str, line: usize, column: &'static str) -> Result<i32, StationTableError> {
    s.parse().map_err(|_| StationTableError::Parse {
        line,
        column,
        message: format!("`{s}` is not a year"),
    })
}
