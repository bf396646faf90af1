//! End-to-end pipeline orchestration and deterministic output emission.
//!
//! Stage order: gauge QC, spatial screen, nearest-pixel extraction, pairing,
//! annual metrics, seasonal models, intensity analysis. Failures are
//! isolated per station×product: every configured pair ends in exactly one
//! report row with an explicit scored or excluded status.
//!
//! All emitted floats are rounded to six significant digits and rows are
//! ordered by station then product, so identical inputs produce
//! byte-identical outputs regardless of worker count.

use crate::config::{ConfigError, RunConfig};
use crate::grid::{extract_point_series, ExtractionResult, GriddedProduct, InputsClass};
use crate::metrics::{
    category_outcome_decomposition, category_pod, observed_category_distribution,
    rain_day_contingency, ContingencyTable, ContinuousScores, DetectionProportions, MetricResult,
};
use crate::numfmt::{fmt_opt_sig6, fmt_sig6, round_sig6};
use crate::pairing::{align, annual_summaries, paired_annual, AnnualSummary, SummaryKind, YearConvention};
use crate::qc::{run_qc, QcReport};
use crate::seasonal::{threshold_sweep, HarmonicModel, SweepResult, PERIOD_DAYS};
use crate::series::{parse_daily_series, DailySeries, RowIssue};
use crate::spatial::{
    blockiness_score, climatology_field, field_to_csv, svg_heatmap, ClimatologyField,
    ClimatologyKind, Verdict,
};
use crate::station::{parse_station_table, StationMeta};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Input(_) => 3,
            PipelineError::Internal(_) => 4,
        }
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

/// Which analysis stages to run; QC and extraction always run.
#[derive(Debug, Clone, Copy)]
pub struct StageSet {
    pub spatial: bool,
    pub annual: bool,
    pub seasonal: bool,
    pub intensity: bool,
}

impl StageSet {
    pub fn all() -> StageSet {
        StageSet {
            spatial: true,
            annual: true,
            seasonal: true,
            intensity: true,
        }
    }

    pub fn none() -> StageSet {
        StageSet {
            spatial: false,
            annual: false,
            seasonal: false,
            intensity: false,
        }
    }

    pub fn spatial_only() -> StageSet {
        StageSet {
            spatial: true,
            ..StageSet::none()
        }
    }

    pub fn seasonal_only() -> StageSet {
        StageSet {
            seasonal: true,
            ..StageSet::none()
        }
    }

    pub fn intensity_only() -> StageSet {
        StageSet {
            intensity: true,
            ..StageSet::none()
        }
    }
}

/// A metric value or the reason it is absent, rounded for emission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub value: Option<f64>,
    pub reason: Option<&'static str>,
}

impl Score {
    fn from_metric(m: MetricResult) -> Score {
        match m {
            Ok(v) => Score {
                value: Some(round_sig6(v)),
                reason: None,
            },
            Err(reason) => Score {
                value: None,
                reason: Some(reason.code()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnualScores {
    pub summary: &'static str,
    pub n: usize,
    pub me: Score,
    pub pbias: Score,
    pub r: Score,
    pub rsd: Score,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnualSummaryRow {
    pub year: i32,
    pub total_mm: f64,
    pub rain_days: u32,
    pub mean_per_rain_day: Option<f64>,
    pub n_valid_days: u32,
    pub valid: bool,
}

impl AnnualSummaryRow {
    fn from_summary(s: &AnnualSummary) -> AnnualSummaryRow {
        AnnualSummaryRow {
            year: s.year_label,
            total_mm: round_sig6(s.total_rain),
            rain_days: s.rain_days,
            mean_per_rain_day: s.mean_rain_per_rain_day.map(round_sig6),
            n_valid_days: s.n_valid_days,
            valid: s.valid,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StationReport {
    pub station_id: String,
    pub country: String,
    pub year_start_month: u32,
    pub qc: QcReport,
    pub parse_issues: Vec<RowIssue>,
    /// Percent share of rainy categories among gauge rain days.
    pub category_distribution: Option<BTreeMap<&'static str, f64>>,
    pub gauge_annual: Vec<AnnualSummaryRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpatialKindReport {
    pub kind: &'static str,
    pub blockiness: Option<f64>,
    pub verdict: Option<Verdict>,
    pub absent_reason: Option<String>,
    pub field: ClimatologyField,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductReport {
    pub product_id: String,
    pub inputs_class: InputsClass,
    pub spatial: Option<Vec<SpatialKindReport>>,
    /// Worst verdict across climatology kinds.
    pub verdict: Option<Verdict>,
    pub excluded_for_inconsistency: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairStatus {
    Scored,
    Excluded { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionInfo {
    pub cell_lat_index: usize,
    pub cell_lon_index: usize,
    pub distance_km: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub beta0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub converged: bool,
    pub deviance: f64,
    pub n_obs: usize,
}

impl ModelReport {
    fn from_model(m: &HarmonicModel) -> ModelReport {
        ModelReport {
            beta0: round_sig6(m.beta0),
            a: m.a.iter().map(|v| round_sig6(*v)).collect(),
            b: m.b.iter().map(|v| round_sig6(*v)).collect(),
            converged: m.converged,
            deviance: round_sig6(m.deviance),
            n_obs: m.n_obs,
        }
    }

    fn to_model(&self, k: usize) -> HarmonicModel {
        HarmonicModel {
            k,
            period: PERIOD_DAYS as f64,
            beta0: self.beta0,
            a: self.a.clone(),
            b: self.b.clone(),
            converged: self.converged,
            deviance: self.deviance,
            n_obs: self.n_obs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRowReport {
    pub tr: f64,
    pub model: Option<ModelReport>,
    pub curve_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeasonalReport {
    pub gauge_tr: f64,
    pub k: usize,
    pub gauge_model: ModelReport,
    pub rows: Vec<SweepRowReport>,
    pub best_tr: Option<f64>,
}

impl SeasonalReport {
    fn from_sweep(sweep: &SweepResult, gauge_tr: f64, k: usize) -> SeasonalReport {
        SeasonalReport {
            gauge_tr,
            k,
            gauge_model: ModelReport::from_model(&sweep.gauge_model),
            rows: sweep
                .rows
                .iter()
                .map(|row| SweepRowReport {
                    tr: row.tr,
                    model: row.model.as_ref().map(ModelReport::from_model),
                    curve_distance: row.curve_distance.map(round_sig6),
                    error: row.error.clone(),
                })
                .collect(),
            best_tr: sweep.best_tr,
        }
    }

    /// The sweep row the curve export uses: the best threshold's model.
    fn best_row(&self) -> Option<&SweepRowReport> {
        let best = self.best_tr?;
        self.rows
            .iter()
            .find(|r| r.tr == best && r.model.is_some())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryDetectionReport {
    pub n_observed: u64,
    pub pod: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryOutcomeReport {
    pub n_observed: u64,
    pub true_hit: f64,
    pub true_miss: f64,
    pub lower: f64,
    pub higher: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub station_id: String,
    pub product_id: String,
    pub status: PairStatus,
    pub extraction: Option<ExtractionInfo>,
    pub n_paired_days: Option<usize>,
    pub product_annual: Option<Vec<AnnualSummaryRow>>,
    pub annual_scores: Option<Vec<AnnualScores>>,
    pub contingency: Option<ContingencyTable>,
    pub detection_proportions: Option<DetectionProportions>,
    pub pod: Option<Score>,
    pub category_pod: Option<BTreeMap<&'static str, CategoryDetectionReport>>,
    pub category_outcome: Option<BTreeMap<&'static str, CategoryOutcomeReport>>,
    pub seasonal: Option<SeasonalReport>,
    pub seasonal_error: Option<String>,
}

/// Full validation report: one entry per station, per product, and per
/// configured station×product pair.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub stations: Vec<StationReport>,
    pub products: Vec<ProductReport>,
    pub pairs: Vec<PairReport>,
}

struct StationState {
    meta: StationMeta,
    series: DailySeries,
    qc: QcReport,
    issues: Vec<RowIssue>,
    convention: YearConvention,
    gauge_annual: Vec<AnnualSummary>,
}

struct ProductState {
    product_id: String,
    product: GriddedProduct,
    spatial: Option<Vec<SpatialKindReport>>,
    verdict: Option<Verdict>,
    excluded: bool,
}

/// Runs the full pipeline with default staging and worker count.
pub fn run_pipeline(config: &RunConfig) -> Result<ValidationReport, PipelineError> {
    run_pipeline_with(config, None, StageSet::all())
}

/// Runs the pipeline on a bounded worker pool with selected stages.
pub fn run_pipeline_with(
    config: &RunConfig,
    jobs: Option<usize>,
    stages: StageSet,
) -> Result<ValidationReport, PipelineError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Internal(format!("worker pool: {e}")))?;
    pool.install(|| run_inner(config, stages))
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

fn run_inner(config: &RunConfig, stages: StageSet) -> Result<ValidationReport, PipelineError> {
    let table_raw = read_text(&config.station_table)?;
    let table =
        parse_station_table(&table_raw).map_err(|e| PipelineError::Input(e.to_string()))?;
    let by_id: BTreeMap<&str, &StationMeta> =
        table.iter().map(|s| (s.station_id.as_str(), s)).collect();
    for id in config.series.keys() {
        if !by_id.contains_key(id.as_str()) {
            return Err(PipelineError::Config(format!(
                "series `{id}` has no row in the station table"
            )));
        }
    }

    // Stations with a configured series, QC'd in parallel.
    let parse_options = config.parse_options();
    let station_inputs: Vec<(&StationMeta, &PathBuf)> = config
        .series
        .iter()
        .map(|(id, path)| (by_id[id.as_str()], path))
        .collect();
    let mut stations: Vec<StationState> = station_inputs
        .par_iter()
        .map(|(meta, path)| -> Result<StationState, PipelineError> {
            let raw = read_text(path)?;
            let (series, issues) = parse_daily_series(&raw, &meta.station_id, &parse_options)
                .map_err(|e| {
                    PipelineError::Input(format!("{}: {e}", path.display()))
                })?;
            let (series, qc) = run_qc(&series, &config.qc_config_for(&meta.country));
            let convention = config.convention_for(&meta.country);
            let gauge_annual = annual_summaries(
                &series,
                config.rain_day_threshold,
                convention,
                config.pairing.min_valid_days,
            );
            Ok(StationState {
                meta: (*meta).clone(),
                series,
                qc,
                issues,
                convention,
                gauge_annual,
            })
        })
        .collect::<Result<_, _>>()?;
    stations.sort_by(|a, b| a.meta.station_id.cmp(&b.meta.station_id));

    // Products, loaded and spatially screened in parallel.
    let product_inputs: Vec<(&String, &crate::config::ProductConfig)> =
        config.products.iter().collect();
    let mut products: Vec<ProductState> = product_inputs
        .par_iter()
        .map(|(id, pc)| -> Result<ProductState, PipelineError> {
            let descriptor_raw = read_text(&pc.descriptor)?;
            let payload = read_bytes(&pc.payload)?;
            let product =
                GriddedProduct::load(id.as_str(), pc.inputs_class, &descriptor_raw, &payload)
                    .map_err(|e| PipelineError::Input(format!("product `{id}`: {e}")))?;

            let (spatial, verdict) = if stages.spatial && config.spatial.enabled {
                let mut kinds = Vec::new();
                let mut worst: Option<Verdict> = None;
                for kind in ClimatologyKind::ALL {
                    let field = climatology_field(
                        &product,
                        kind,
                        config.rain_day_threshold,
                        YearConvention::CALENDAR,
                        config.pairing.min_valid_days,
                    );
                    let field = rounded_field(field);
                    let entry = match blockiness_score(&field, config.spatial.thresholds.into()) {
                        Ok(score) => {
                            worst = Some(worst.map_or(score.verdict, |w| w.max(score.verdict)));
                            SpatialKindReport {
                                kind: kind.code(),
                                blockiness: Some(round_sig6(score.blockiness)),
                                verdict: Some(score.verdict),
                                absent_reason: None,
                                field,
                            }
                        }
                        Err(e) => SpatialKindReport {
                            kind: kind.code(),
                            blockiness: None,
                            verdict: None,
                            absent_reason: Some(e.to_string()),
                            field,
                        },
                    };
                    kinds.push(entry);
                }
                (Some(kinds), worst)
            } else {
                (None, None)
            };

            let excluded = config.spatial.exclude_inconsistent
                && verdict == Some(Verdict::Inconsistent);
            Ok(ProductState {
                product_id: id.to_string(),
                product,
                spatial,
                verdict,
                excluded,
            })
        })
        .collect::<Result<_, _>>()?;
    products.sort_by(|a, b| a.product_id.cmp(&b.product_id));

    // Per-pair analysis on the worker pool, then a deterministic reduce.
    let pair_indices: Vec<(usize, usize)> = (0..stations.len())
        .flat_map(|s| (0..products.len()).map(move |p| (s, p)))
        .collect();
    let mut pairs: Vec<PairReport> = pair_indices
        .par_iter()
        .map(|&(si, pi)| score_pair(config, stages, &stations[si], &products[pi]))
        .collect();
    pairs.sort_by(|a, b| {
        (a.station_id.as_str(), a.product_id.as_str())
            .cmp(&(b.station_id.as_str(), b.product_id.as_str()))
    });

    let expected = stations.len() * products.len();
    if pairs.len() != expected {
        return Err(PipelineError::Internal(format!(
            "expected {expected} pair rows, produced {}",
            pairs.len()
        )));
    }

    let station_reports = stations
        .iter()
        .map(|s| StationReport {
            station_id: s.meta.station_id.clone(),
            country: s.meta.country.clone(),
            year_start_month: s.convention.start_month(),
            qc: rounded_qc(&s.qc),
            parse_issues: s.issues.clone(),
            category_distribution: observed_category_distribution(&s.series)
                .ok()
                .map(|m| {
                    m.into_iter()
                        .map(|(c, v)| (c.code(), round_sig6(v)))
                        .collect()
                }),
            gauge_annual: s.gauge_annual.iter().map(AnnualSummaryRow::from_summary).collect(),
        })
        .collect();
    let product_reports = products
        .into_iter()
        .map(|p| ProductReport {
            product_id: p.product_id,
            inputs_class: p.product.meta.inputs_class,
            spatial: p.spatial,
            verdict: p.verdict,
            excluded_for_inconsistency: p.excluded,
        })
        .collect();

    Ok(ValidationReport {
        stations: station_reports,
        products: product_reports,
        pairs,
    })
}

fn rounded_qc(qc: &QcReport) -> QcReport {
    QcReport {
        station_id: qc.station_id.clone(),
        counts: qc.counts.clone(),
        completeness_before: round_sig6(qc.completeness_before),
        completeness_after: round_sig6(qc.completeness_after),
        eligible: qc.eligible,
    }
}

fn rounded_field(mut field: ClimatologyField) -> ClimatologyField {
    for v in field.values.iter_mut() {
        *v = v.map(round_sig6);
    }
    field
}

fn score_pair(
    config: &RunConfig,
    stages: StageSet,
    station: &StationState,
    product: &ProductState,
) -> PairReport {
    let mut report = PairReport {
        station_id: station.meta.station_id.clone(),
        product_id: product.product_id.clone(),
        status: PairStatus::Scored,
        extraction: None,
        n_paired_days: None,
        product_annual: None,
        annual_scores: None,
        contingency: None,
        detection_proportions: None,
        pod: None,
        category_pod: None,
        category_outcome: None,
        seasonal: None,
        seasonal_error: None,
    };

    if !station.qc.eligible {
        report.status = PairStatus::Excluded {
            reason: "gauge ineligible".into(),
        };
        return report;
    }
    if product.excluded {
        report.status = PairStatus::Excluded {
            reason: "spatial inconsistency".into(),
        };
        return report;
    }

    let extraction = extract_point_series(
        &product.product,
        &station.meta,
        config.extraction.max_missing_fraction,
    );
    let product_series = match extraction {
        ExtractionResult::Excluded { reason } => {
            report.status = PairStatus::Excluded { reason };
            return report;
        }
        ExtractionResult::Series {
            series,
            cell_lat_index,
            cell_lon_index,
            distance_km,
        } => {
            report.extraction = Some(ExtractionInfo {
                cell_lat_index,
                cell_lon_index,
                distance_km: round_sig6(distance_km),
            });
            series
        }
    };

    let pairs = align(&station.series, &product_series, product.product_id.clone());
    report.n_paired_days = Some(pairs.len());

    if stages.annual {
        let product_annual = annual_summaries(
            &product_series,
            config.rain_day_threshold,
            station.convention,
            config.pairing.min_valid_days,
        );
        let paired = paired_annual(
            &station.gauge_annual,
            &product_annual,
            config.pairing.symmetric_year_screen,
        );
        let mut scores = Vec::new();
        for kind in SummaryKind::ALL {
            let rows = paired.for_kind(kind);
            let bundle = if rows.len() < 2 {
                ContinuousScores::absent(
                    rows.len(),
                    crate::metrics::AbsentReason::InsufficientJointYears,
                )
            } else {
                let gauge: Vec<f64> = rows.iter().map(|(_, g, _)| *g).collect();
                let prod: Vec<f64> = rows.iter().map(|(_, _, p)| *p).collect();
                ContinuousScores::compute(&prod, &gauge)
            };
            scores.push(AnnualScores {
                summary: kind.code(),
                n: bundle.n,
                me: Score::from_metric(bundle.me),
                pbias: Score::from_metric(bundle.pbias),
                r: Score::from_metric(bundle.r),
                rsd: Score::from_metric(bundle.rsd),
            });
        }
        report.annual_scores = Some(scores);
        report.product_annual = Some(
            product_annual
                .iter()
                .map(AnnualSummaryRow::from_summary)
                .collect(),
        );
    }

    if stages.intensity {
        let table = rain_day_contingency(&pairs, config.rain_day_threshold);
        report.pod = Some(Score::from_metric(table.pod()));
        report.detection_proportions = table.proportions().map(|p| DetectionProportions {
            hit: round_sig6(p.hit),
            miss: round_sig6(p.miss),
            false_alarm: round_sig6(p.false_alarm),
            correct_negative: round_sig6(p.correct_negative),
        });
        report.contingency = Some(table);
        report.category_pod = Some(
            category_pod(&pairs)
                .into_iter()
                .map(|(c, d)| {
                    (
                        c.code(),
                        CategoryDetectionReport {
                            n_observed: d.n_observed,
                            pod: round_sig6(d.pod),
                        },
                    )
                })
                .collect(),
        );
        report.category_outcome = Some(
            category_outcome_decomposition(&pairs)
                .rows
                .into_iter()
                .map(|(c, row)| {
                    (
                        c.code(),
                        CategoryOutcomeReport {
                            n_observed: row.n_observed,
                            true_hit: round_sig6(row.true_hit),
                            true_miss: round_sig6(row.true_miss),
                            lower: round_sig6(row.lower),
                            higher: round_sig6(row.higher),
                        },
                    )
                })
                .collect(),
        );
    }

    if stages.seasonal {
        match threshold_sweep(
            &pairs,
            config.rain_day_threshold,
            &config.sweep_thresholds,
            config.harmonics,
            station.convention,
        ) {
            Ok(sweep) => {
                report.seasonal = Some(SeasonalReport::from_sweep(
                    &sweep,
                    config.rain_day_threshold,
                    config.harmonics,
                ));
            }
            Err(e) => report.seasonal_error = Some(e.to_string()),
        }
    }

    report
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, contents)
        .map_err(|e| PipelineError::Input(format!("write {}: {e}", path.display())))
}

/// Writes the score tables, seasonal curves, category tables, QC reports,
/// JSON bundle, and heatmaps. File names are deterministic; returns the
/// emitted paths in order.
pub fn emit_outputs(
    report: &ValidationReport,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| PipelineError::Input(format!("create {}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    let emit = |name: String, contents: &[u8]| -> Result<PathBuf, PipelineError> {
        let path = out_dir.join(name);
        write_file(&path, contents)?;
        Ok(path)
    };

    let json = serde_json::to_string_pretty(report)
        .map_err(|e| PipelineError::Internal(format!("serialize report: {e}")))?;
    written.push(emit("report.json".into(), format!("{json}\n").as_bytes())?);

    written.push(emit("scores.csv".into(), scores_csv(report).as_bytes())?);
    written.push(emit("annual.csv".into(), annual_csv(report).as_bytes())?);
    written.push(emit("categories.csv".into(), categories_csv(report).as_bytes())?);
    written.push(emit(
        "distribution.csv".into(),
        distribution_csv(report).as_bytes(),
    )?);
    written.push(emit("models.csv".into(), models_csv(report).as_bytes())?);

    for station in &report.stations {
        let qc_json = serde_json::to_string_pretty(&station.qc)
            .map_err(|e| PipelineError::Internal(format!("serialize qc: {e}")))?;
        written.push(emit(
            format!("{}__qc.json", station.station_id),
            format!("{qc_json}\n").as_bytes(),
        )?);
    }

    for product in &report.products {
        if let Some(kinds) = &product.spatial {
            for entry in kinds {
                written.push(emit(
                    format!("{}__{}__field.csv", product.product_id, entry.kind),
                    field_to_csv(&entry.field).as_bytes(),
                )?);
                written.push(emit(
                    format!("{}__{}__heatmap.svg", product.product_id, entry.kind),
                    svg_heatmap(&entry.field).as_bytes(),
                )?);
            }
        }
    }

    for pair in &report.pairs {
        let Some(seasonal) = &pair.seasonal else {
            continue;
        };
        let Some(best) = seasonal.best_row() else {
            continue;
        };
        let gauge = seasonal.gauge_model.to_model(seasonal.k);
        let product = best.model.as_ref().expect("best row has a model").to_model(seasonal.k);
        let mut csv = String::from("t,p_gauge,p_product\n");
        for t in 1..=PERIOD_DAYS {
            csv.push_str(&format!(
                "{t},{},{}\n",
                fmt_sig6(gauge.predict(t as f64)),
                fmt_sig6(product.predict(t as f64))
            ));
        }
        written.push(emit(
            format!("{}__{}__curves.csv", pair.station_id, pair.product_id),
            csv.as_bytes(),
        )?);
    }

    Ok(written)
}

fn score_cells(score: &Score) -> (String, String) {
    (
        fmt_opt_sig6(score.value),
        score.reason.unwrap_or_default().to_string(),
    )
}

fn scores_csv(report: &ValidationReport) -> String {
    let mut out = String::from("station,product,summary,metric,value,n,reason_if_absent\n");
    for pair in &report.pairs {
        let Some(scores) = &pair.annual_scores else {
            continue;
        };
        for entry in scores {
            for (metric, score) in [
                ("me", &entry.me),
                ("pbias", &entry.pbias),
                ("r", &entry.r),
                ("rsd", &entry.rsd),
            ] {
                let (value, reason) = score_cells(score);
                out.push_str(&format!(
                    "{},{},{},{metric},{value},{},{reason}\n",
                    pair.station_id, pair.product_id, entry.summary, entry.n
                ));
            }
        }
    }
    out
}

fn annual_row(station: &str, product: &str, row: &AnnualSummaryRow) -> String {
    format!(
        "{station},{product},{},{},{},{},{}\n",
        row.year,
        fmt_sig6(row.total_mm),
        row.rain_days,
        fmt_opt_sig6(row.mean_per_rain_day),
        row.valid
    )
}

fn annual_csv(report: &ValidationReport) -> String {
    let mut out = String::from("station,product,year,total_mm,rain_days,mean_per_rain_day,valid\n");
    for station in &report.stations {
        for row in &station.gauge_annual {
            out.push_str(&annual_row(&station.station_id, "gauge", row));
        }
    }
    for pair in &report.pairs {
        if let Some(rows) = &pair.product_annual {
            for row in rows {
                out.push_str(&annual_row(&pair.station_id, &pair.product_id, row));
            }
        }
    }
    out
}

fn categories_csv(report: &ValidationReport) -> String {
    let mut out =
        String::from("station,product,category,n_observed,pod,true_hit,true_miss,lower,higher\n");
    for pair in &report.pairs {
        let (Some(pods), Some(outcomes)) = (&pair.category_pod, &pair.category_outcome) else {
            continue;
        };
        for (category, detection) in pods {
            let outcome = &outcomes[category];
            out.push_str(&format!(
                "{},{},{category},{},{},{},{},{},{}\n",
                pair.station_id,
                pair.product_id,
                detection.n_observed,
                fmt_sig6(detection.pod),
                fmt_sig6(outcome.true_hit),
                fmt_sig6(outcome.true_miss),
                fmt_sig6(outcome.lower),
                fmt_sig6(outcome.higher),
            ));
        }
    }
    out
}

fn distribution_csv(report: &ValidationReport) -> String {
    let mut out = String::from("station,category,percent\n");
    for station in &report.stations {
        if let Some(dist) = &station.category_distribution {
            for (category, percent) in dist {
                out.push_str(&format!(
                    "{},{category},{}\n",
                    station.station_id,
                    fmt_sig6(*percent)
                ));
            }
        }
    }
    out
}

fn models_csv(report: &ValidationReport) -> String {
    let max_k = report
        .pairs
        .iter()
        .filter_map(|p| p.seasonal.as_ref())
        .map(|s| s.k)
        .max()
        .unwrap_or(0);
    let mut out = String::from("station,product,series,tr,k");
    for i in 1..=max_k {
        out.push_str(&format!(",A{i},B{i}"));
    }
    out.push_str(",beta0,converged,deviance,curve_distance,error\n");

    let mut push_model = |station: &str,
                          product: &str,
                          series: &str,
                          tr: f64,
                          k: usize,
                          model: Option<&ModelReport>,
                          distance: Option<f64>,
                          error: Option<&str>| {
        out.push_str(&format!("{station},{product},{series},{},{k}", fmt_sig6(tr)));
        for i in 0..max_k {
            match model {
                Some(m) if i < m.a.len() => {
                    out.push_str(&format!(",{},{}", fmt_sig6(m.a[i]), fmt_sig6(m.b[i])));
                }
                _ => out.push_str(",,"),
            }
        }
        match model {
            Some(m) => out.push_str(&format!(
                ",{},{},{}",
                fmt_sig6(m.beta0),
                m.converged,
                fmt_sig6(m.deviance)
            )),
            None => out.push_str(",,,"),
        }
        out.push_str(&format!(
            ",{},{}\n",
            fmt_opt_sig6(distance),
            error.unwrap_or_default()
        ));
    };

    for pair in &report.pairs {
        let Some(seasonal) = &pair.seasonal else {
            continue;
        };
        push_model(
            &pair.station_id,
            &pair.product_id,
            "gauge",
            seasonal.gauge_tr,
            seasonal.k,
            Some(&seasonal.gauge_model),
            None,
            None,
        );
        for row in &seasonal.rows {
            push_model(
                &pair.station_id,
                &pair.product_id,
                "product",
                row.tr,
                seasonal.k,
                row.model.as_ref(),
                row.curve_distance,
                row.error.as_deref(),
            );
        }
    }
    out
}
