//! Point-to-pixel validation of gridded rainfall products against daily
//! rain-gauge observations.
//!
//! The crate compares a gauge's point measurements with the nearest grid
//! cell of a satellite or reanalysis rainfall product and scores the
//! agreement from several angles:
//!
//! 1. **Ingest + QC** ([`station`], [`series`], [`qc`]) — parse station
//!    tables and daily series, flag suspect values, decide eligibility.
//! 2. **Grid store** ([`grid`]) — load gridded products from a descriptor
//!    plus flat binary payload and extract the nearest-pixel daily series.
//! 3. **Pairing** ([`pairing`]) — align gauge and product on mutually
//!    non-missing days, assign water years, build annual summaries.
//! 4. **Scores** ([`metrics`]) — continuous skill on annual summaries
//!    (mean error, percent bias, correlation, variability ratio) and
//!    categorical detection skill on daily pairs (contingency tables,
//!    probability of detection, intensity-category outcomes).
//! 5. **Seasonal occurrence** ([`seasonal`]) — day-of-year rain occurrence
//!    modeled by logistic regression on a Fourier basis, with a rain-day
//!    threshold sensitivity sweep.
//! 6. **Spatial consistency** ([`spatial`]) — per-cell climatology fields
//!    scored for pixelation artifacts.
//! 7. **Orchestration** ([`config`], [`report`]) — a config-driven pipeline
//!    producing deterministic CSV/JSON/SVG outputs, wired to the `rainval`
//!    CLI.
//!
//! All analysis types are immutable after construction and safe to share
//! across threads; the pipeline parallelizes per station×product.

pub mod config;
pub mod grid;
pub mod metrics;
pub mod numfmt;
pub mod pairing;
pub mod qc;
pub mod report;
pub mod seasonal;
pub mod series;
pub mod spatial;
pub mod station;

pub use config::RunConfig;
pub use grid::{ExtractionResult, GridDescriptor, GriddedProduct, ProductMeta};
pub use metrics::{
    classify_intensity, AbsentReason, ContingencyTable, ContinuousScores, IntensityCategory,
};
pub use pairing::{AnnualSummary, PairedDailySeries, YearConvention};
pub use qc::{QcConfig, QcReport};
pub use report::{run_pipeline, ValidationReport};
pub use seasonal::{BinaryOccurrenceSeries, HarmonicModel};
pub use series::{DailySeries, DayStatus, QcReason};
pub use spatial::{ClimatologyField, ConsistencyScore, Verdict};
pub use station::StationMeta;
