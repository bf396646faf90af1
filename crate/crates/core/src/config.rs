//! Run configuration: one TOML file drives the whole pipeline.
//!
//! Every QC and threshold parameter is surfaced here so a run is fully
//! reproducible from its config. Paths are resolved relative to the config
//! file's directory.

use crate::grid::InputsClass;
use crate::pairing::{PairingError, YearConvention};
use crate::qc::QcConfig;
use crate::spatial::SpatialThresholds;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {0}")]
    Invalid(String),
    #[error("config: {0}")]
    Convention(#[from] PairingError),
}

fn default_rain_day_threshold() -> f64 {
    0.85
}

fn default_harmonics() -> usize {
    3
}

fn default_sweep_thresholds() -> Vec<f64> {
    vec![0.85, 2.0, 3.0, 4.0, 5.0]
}

fn default_min_valid_days() -> usize {
    crate::pairing::DEFAULT_MIN_VALID_DAYS
}

fn default_true() -> bool {
    true
}

fn default_eligibility() -> f64 {
    0.70
}

fn default_min_run() -> usize {
    5
}

fn default_min_identical_value() -> f64 {
    1.0
}

fn default_max_daily_mm() -> f64 {
    400.0
}

fn default_dry_month_floor() -> f64 {
    50.0
}

fn default_min_station_years() -> usize {
    5
}

fn default_max_missing_fraction() -> f64 {
    1.0
}

fn default_missing_tokens() -> Vec<String> {
    crate::series::ParseOptions::default().missing_tokens
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductConfig {
    pub descriptor: PathBuf,
    pub payload: PathBuf,
    #[serde(default = "default_inputs_class")]
    pub inputs_class: InputsClass,
}

fn default_inputs_class() -> InputsClass {
    InputsClass::Satellite
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcSettings {
    #[serde(default = "default_min_run")]
    pub min_run: usize,
    #[serde(default = "default_min_identical_value")]
    pub min_identical_value: f64,
    #[serde(default = "default_max_daily_mm")]
    pub max_daily_mm: f64,
    #[serde(default = "default_dry_month_floor")]
    pub dry_month_floor_mm: f64,
    #[serde(default = "default_min_station_years")]
    pub min_station_years: usize,
    #[serde(default = "default_eligibility")]
    pub eligibility_threshold: f64,
    /// Wet months (1-12) per country; countries not listed skip the
    /// dry-month check.
    #[serde(default)]
    pub wet_months: BTreeMap<String, Vec<u32>>,
    #[serde(default = "default_missing_tokens")]
    pub missing_tokens: Vec<String>,
    /// Period over which eligibility is assessed (ISO dates, quoted);
    /// defaults to each series' own extent.
    #[serde(default)]
    pub analysis_start: Option<chrono::NaiveDate>,
    #[serde(default)]
    pub analysis_end: Option<chrono::NaiveDate>,
}

impl Default for QcSettings {
    fn default() -> Self {
        QcSettings {
            min_run: default_min_run(),
            min_identical_value: default_min_identical_value(),
            max_daily_mm: default_max_daily_mm(),
            dry_month_floor_mm: default_dry_month_floor(),
            min_station_years: default_min_station_years(),
            eligibility_threshold: default_eligibility(),
            wet_months: BTreeMap::new(),
            missing_tokens: default_missing_tokens(),
            analysis_start: None,
            analysis_end: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialSettings {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Exclude inconsistent products from downstream validation.
    #[serde(default = "default_true")]
    pub exclude_inconsistent: bool,
    #[serde(default)]
    pub thresholds: SpatialThresholdsConfig,
}

impl Default for SpatialSettings {
    fn default() -> Self {
        SpatialSettings {
            enabled: true,
            exclude_inconsistent: true,
            thresholds: SpatialThresholdsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialThresholdsConfig {
    pub consistent_below: f64,
    pub suspicious_below: f64,
}

impl Default for SpatialThresholdsConfig {
    fn default() -> Self {
        let d = SpatialThresholds::default();
        SpatialThresholdsConfig {
            consistent_below: d.consistent_below,
            suspicious_below: d.suspicious_below,
        }
    }
}

impl From<SpatialThresholdsConfig> for SpatialThresholds {
    fn from(c: SpatialThresholdsConfig) -> Self {
        SpatialThresholds {
            consistent_below: c.consistent_below,
            suspicious_below: c.suspicious_below,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingSettings {
    #[serde(default = "default_min_valid_days")]
    pub min_valid_days: usize,
    /// Apply the minimum-days rule to the product side too.
    #[serde(default = "default_true")]
    pub symmetric_year_screen: bool,
}

impl Default for PairingSettings {
    fn default() -> Self {
        PairingSettings {
            min_valid_days: default_min_valid_days(),
            symmetric_year_screen: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionSettings {
    #[serde(default = "default_max_missing_fraction")]
    pub max_missing_fraction: f64,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        ExtractionSettings {
            max_missing_fraction: default_max_missing_fraction(),
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub station_table: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default = "default_rain_day_threshold")]
    pub rain_day_threshold: f64,
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
    #[serde(default = "default_sweep_thresholds")]
    pub sweep_thresholds: Vec<f64>,
    /// Station id -> daily series CSV.
    pub series: BTreeMap<String, PathBuf>,
    /// Product id -> grid files.
    pub products: BTreeMap<String, ProductConfig>,
    /// Country -> accounting-year start month (1-12); unlisted countries use
    /// the calendar year.
    #[serde(default)]
    pub year_convention: BTreeMap<String, u32>,
    #[serde(default)]
    pub qc: QcSettings,
    #[serde(default)]
    pub spatial: SpatialSettings,
    #[serde(default)]
    pub pairing: PairingSettings,
    #[serde(default)]
    pub extraction: ExtractionSettings,
}

impl RunConfig {
    /// Reads a config file, resolves its paths, and validates it.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: RunConfig = toml::from_str(&raw)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        resolve(&mut self.station_table);
        resolve(&mut self.out_dir);
        for p in self.series.values_mut() {
            resolve(p);
        }
        for product in self.products.values_mut() {
            resolve(&mut product.descriptor);
            resolve(&mut product.payload);
        }
    }

    /// Checks referenced paths and parameter ranges.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |message: String| Err(ConfigError::Invalid(message));
        if !self.station_table.is_file() {
            return invalid(format!(
                "station_table `{}` does not exist",
                self.station_table.display()
            ));
        }
        for (id, path) in &self.series {
            if !path.is_file() {
                return invalid(format!("series `{id}`: `{}` does not exist", path.display()));
            }
        }
        for (id, product) in &self.products {
            for path in [&product.descriptor, &product.payload] {
                if !path.is_file() {
                    return invalid(format!(
                        "product `{id}`: `{}` does not exist",
                        path.display()
                    ));
                }
            }
        }
        if self.rain_day_threshold <= 0.0 || self.rain_day_threshold.is_nan() {
            return invalid("rain_day_threshold must be positive".into());
        }
        if self.sweep_thresholds.is_empty() {
            return invalid("sweep_thresholds must not be empty".into());
        }
        for w in self.sweep_thresholds.windows(2) {
            if w[1] <= w[0] || w[1].is_nan() || w[0].is_nan() {
                return invalid("sweep_thresholds must be strictly increasing".into());
            }
        }
        if self.sweep_thresholds[0] <= 0.0 || self.sweep_thresholds[0].is_nan() {
            return invalid("sweep_thresholds must be positive".into());
        }
        for (country, month) in &self.year_convention {
            YearConvention::new(*month).map_err(|e| {
                ConfigError::Invalid(format!("year_convention for {country}: {e}"))
            })?;
        }
        for (country, months) in &self.qc.wet_months {
            if months.iter().any(|m| !(1..=12).contains(m)) {
                return invalid(format!("wet_months for {country} outside 1..=12"));
            }
        }
        if !(0.0..=1.0).contains(&self.qc.eligibility_threshold) {
            return invalid("qc.eligibility_threshold must be in [0, 1]".into());
        }
        if let (Some(a), Some(b)) = (self.qc.analysis_start, self.qc.analysis_end) {
            if a > b {
                return invalid(format!("qc analysis period {a}..{b} is reversed"));
            }
        }
        if !(0.0..=1.0).contains(&self.extraction.max_missing_fraction) {
            return invalid("extraction.max_missing_fraction must be in [0, 1]".into());
        }
        Ok(())
    }

    /// Accounting-year convention for a station's country.
    pub fn convention_for(&self, country: &str) -> YearConvention {
        self.year_convention
            .get(country)
            .map(|m| YearConvention::new(*m).expect("validated at load"))
            .unwrap_or(YearConvention::CALENDAR)
    }

    /// QC parameters for a station's country.
    pub fn qc_config_for(&self, country: &str) -> QcConfig {
        let wet_months: BTreeSet<u32> = self
            .qc
            .wet_months
            .get(country)
            .map(|m| m.iter().copied().collect())
            .unwrap_or_default();
        QcConfig {
            min_run: self.qc.min_run,
            min_identical_value: self.qc.min_identical_value,
            max_daily_mm: self.qc.max_daily_mm,
            wet_months,
            dry_month_floor_mm: self.qc.dry_month_floor_mm,
            min_station_years: self.qc.min_station_years,
            eligibility_threshold: self.qc.eligibility_threshold,
            analysis_period: self.qc.analysis_start.zip(self.qc.analysis_end),
        }
    }

    pub fn parse_options(&self) -> crate::series::ParseOptions {
        crate::series::ParseOptions {
            missing_tokens: self.qc.missing_tokens.clone(),
        }
    }
}
