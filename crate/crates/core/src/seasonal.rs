//! Day-of-year rain occurrence models and the rain-day threshold sweep.
//!
//! Occurrence is a zero-order chain: the probability of a rain day depends
//! only on the day of year, modeled as a Bernoulli GLM with logit link over
//! an intercept plus `k` Fourier harmonics. The solver is iteratively
//! reweighted least squares with a small ridge on the normal equations and
//! step halving, so the deviance never increases between iterations.

use crate::pairing::{PairedDailySeries, YearConvention};
use crate::series::DailySeries;
use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use thiserror::Error;

/// Days in the model year; Feb 29 shares Feb 28's index so the Fourier
/// basis is identical across years.
pub const PERIOD_DAYS: u32 = 365;

/// Deviance change below which the fit is converged.
const DEVIANCE_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;
/// Ridge added to the normal-equation diagonal to guard singularity.
const RIDGE: f64 = 1e-8;
/// A coefficient beyond this magnitude signals perfect separation.
const SEPARATION_NORM: f64 = 30.0;
/// Guard against probabilities underflowing to exactly 0 or 1.
const PROB_FLOOR: f64 = 1e-15;

const CUM_DAYS: [u32; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];

#[derive(Debug, Error)]
pub enum SeasonalError {
    #[error("degenerate occurrence: all outcomes are the same class")]
    DegenerateOccurrence,
    #[error("too few observations: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("normal equations not solvable: {0}")]
    Solver(String),
}

/// Day-of-year index in 1..=365 relative to the convention's year start.
///
/// With an August start, Aug 1 maps to 1 and Jul 31 to 365; Feb 29 shares
/// Feb 28's index.
pub fn day_index_365(date: NaiveDate, convention: YearConvention) -> u32 {
    let month = date.month() as usize;
    let day = if month == 2 { date.day().min(28) } else { date.day() };
    let doy = CUM_DAYS[month - 1] + day;
    let origin = CUM_DAYS[convention.start_month() as usize - 1] + 1;
    (doy + PERIOD_DAYS - origin) % PERIOD_DAYS + 1
}

/// Rain/no-rain outcomes indexed by day of year.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryOccurrenceSeries {
    pub day_index: Vec<u32>,
    pub outcome: Vec<bool>,
    pub threshold: f64,
    pub year_convention: YearConvention,
}

impl BinaryOccurrenceSeries {
    /// Binarizes dated values: a day is wet when its depth reaches the
    /// threshold.
    pub fn from_days(
        days: impl IntoIterator<Item = (NaiveDate, f64)>,
        threshold: f64,
        convention: YearConvention,
    ) -> Self {
        assert!(threshold > 0.0, "rain-day threshold must be positive");
        let mut day_index = Vec::new();
        let mut outcome = Vec::new();
        for (date, value) in days {
            day_index.push(day_index_365(date, convention));
            outcome.push(value >= threshold);
        }
        BinaryOccurrenceSeries {
            day_index,
            outcome,
            threshold,
            year_convention: convention,
        }
    }

    pub fn n(&self) -> usize {
        self.outcome.len()
    }

    fn wet_fraction(&self) -> f64 {
        self.outcome.iter().filter(|w| **w).count() as f64 / self.n() as f64
    }
}

/// Binarizes the observed days of a gauge or product series.
pub fn binarize(
    series: &DailySeries,
    threshold: f64,
    convention: YearConvention,
) -> BinaryOccurrenceSeries {
    BinaryOccurrenceSeries::from_days(series.observed_days(), threshold, convention)
}

/// One design-matrix row: `[1, cos(2πt/p), sin(2πt/p), ..., cos(2πkt/p),
/// sin(2πkt/p)]`.
pub fn design_row(t: f64, k: usize, p: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * k + 1);
    row.push(1.0);
    for i in 1..=k {
        let arg = 2.0 * std::f64::consts::PI * i as f64 * t / p;
        row.push(arg.cos());
        row.push(arg.sin());
    }
    row
}

/// Fitted occurrence model: intercept plus `k` harmonic coefficient pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicModel {
    pub k: usize,
    pub period: f64,
    pub beta0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub converged: bool,
    pub deviance: f64,
    pub n_obs: usize,
}

impl HarmonicModel {
    pub fn linear_predictor(&self, t: f64) -> f64 {
        let mut eta = self.beta0;
        for i in 1..=self.k {
            let arg = 2.0 * std::f64::consts::PI * i as f64 * t / self.period;
            eta += self.a[i - 1] * arg.cos() + self.b[i - 1] * arg.sin();
        }
        eta
    }

    /// Rain-day probability at day-of-year `t`, periodic in the model period
    /// and clamped away from exactly 0 and 1.
    pub fn predict(&self, t: f64) -> f64 {
        sigmoid(self.linear_predictor(t)).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    }

    /// Flat coefficient vector `[beta0, A1, B1, ..., Ak, Bk]`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.k + 1);
        out.push(self.beta0);
        for i in 0..self.k {
            out.push(self.a[i]);
            out.push(self.b[i]);
        }
        out
    }
}

/// Free-function form of [`HarmonicModel::predict`].
pub fn predict_occurrence(model: &HarmonicModel, t: f64) -> f64 {
    model.predict(t)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn bernoulli_deviance(outcome: &[bool], mu: &[f64]) -> f64 {
    let mut dev = 0.0;
    for (y, m) in outcome.iter().zip(mu) {
        let m = m.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        dev += if *y { m.ln() } else { (1.0 - m).ln() };
    }
    -2.0 * dev
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major, p×p).
fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>, p: usize) -> Option<Vec<f64>> {
    // In-place lower-triangular factorization.
    for j in 0..p {
        let mut diag = a[j * p + j];
        for l in 0..j {
            diag -= a[j * p + l] * a[j * p + l];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let diag = diag.sqrt();
        a[j * p + j] = diag;
        for i in (j + 1)..p {
            let mut v = a[i * p + j];
            for l in 0..j {
                v -= a[i * p + l] * a[j * p + l];
            }
            a[i * p + j] = v / diag;
        }
    }
    // Forward substitution L y = b.
    for i in 0..p {
        let mut v = b[i];
        for l in 0..i {
            v -= a[i * p + l] * b[l];
        }
        b[i] = v / a[i * p + i];
    }
    // Back substitution L' x = y.
    for i in (0..p).rev() {
        let mut v = b[i];
        for l in (i + 1)..p {
            v -= a[l * p + i] * b[l];
        }
        b[i] = v / a[i * p + i];
    }
    Some(b)
}

/// Fits the occurrence model by maximum likelihood.
///
/// Requires both outcome classes and at least ten observations per
/// coefficient. Convergence is a deviance change below 1e-8 within 100
/// iterations; a fit whose coefficients blow past the separation guard is
/// returned with `converged = false` rather than diverging silently.
pub fn fit_occurrence(
    series: &BinaryOccurrenceSeries,
    k: usize,
) -> Result<HarmonicModel, SeasonalError> {
    let p = 2 * k + 1;
    let n = series.n();
    let needed = 10 * p;
    if n < needed {
        return Err(SeasonalError::InsufficientData { needed, got: n });
    }
    let wet = series.wet_fraction();
    if wet == 0.0 || wet == 1.0 {
        return Err(SeasonalError::DegenerateOccurrence);
    }

    let period = PERIOD_DAYS as f64;
    let mut design = Vec::with_capacity(n * p);
    for &t in &series.day_index {
        design.extend(design_row(t as f64, k, period));
    }
    let y = &series.outcome;

    let mut beta = vec![0.0; p];
    let mut eta = vec![0.0; n];
    let mut mu = vec![0.5; n];
    let mut deviance = bernoulli_deviance(y, &mu);
    let mut converged = false;
    let mut settled_iterations = 0usize;

    for _ in 0..MAX_ITERATIONS {
        // Weighted normal equations X'WX β = X'Wz with working response z.
        let mut a = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for i in 0..n {
            let m = mu[i];
            let w = (m * (1.0 - m)).max(1e-10);
            let z = eta[i] + ((y[i] as u8 as f64) - m) / w;
            let row = &design[i * p..(i + 1) * p];
            for (ai, &xi) in row.iter().enumerate() {
                rhs[ai] += w * z * xi;
                for (bj, &xj) in row.iter().enumerate().skip(ai) {
                    a[ai * p + bj] += w * xi * xj;
                }
            }
        }
        for ai in 0..p {
            for bj in (ai + 1)..p {
                a[bj * p + ai] = a[ai * p + bj];
            }
        }
        // The ridge guards singularity only; a well-conditioned solve stays
        // unbiased so the intercept-only fit hits the exact MLE.
        let proposal = match cholesky_solve(a.clone(), rhs.clone(), p) {
            Some(solution) => solution,
            None => {
                for ai in 0..p {
                    a[ai * p + ai] += RIDGE;
                }
                cholesky_solve(a, rhs, p).ok_or_else(|| {
                    SeasonalError::Solver("normal equations not positive definite".into())
                })?
            }
        };

        // Step halving keeps the deviance non-increasing.
        let mut step = 1.0;
        let (next_beta, next_eta, next_mu, next_dev) = loop {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(&proposal)
                .map(|(old, new)| old + step * (new - old))
                .collect();
            let mut cand_eta = vec![0.0; n];
            let mut cand_mu = vec![0.0; n];
            for i in 0..n {
                let row = &design[i * p..(i + 1) * p];
                let e: f64 = row.iter().zip(&candidate).map(|(x, b)| x * b).sum();
                cand_eta[i] = e;
                cand_mu[i] = sigmoid(e);
            }
            let cand_dev = bernoulli_deviance(y, &cand_mu);
            if cand_dev <= deviance + 1e-10 {
                break (candidate, cand_eta, cand_mu, cand_dev);
            }
            step /= 2.0;
            if step < 1e-10 {
                // No improving step exists; stay put.
                break (beta.clone(), eta.clone(), mu.clone(), deviance);
            }
        };
        assert!(
            next_dev <= deviance + 1e-10,
            "IRLS deviance increased: {deviance} -> {next_dev}"
        );

        let delta = deviance - next_dev;
        beta = next_beta;
        eta = next_eta;
        mu = next_mu;
        deviance = next_dev;
        // One confirming iteration after the tolerance first fires: the
        // extra Newton step squares the residual coefficient error, which
        // keeps small-sample intercept fits exact to well below 1e-10.
        if delta.abs() < DEVIANCE_TOLERANCE {
            settled_iterations += 1;
            if settled_iterations >= 2 {
                converged = true;
                break;
            }
        } else {
            settled_iterations = 0;
        }
    }

    if beta.iter().any(|c| c.abs() > SEPARATION_NORM) {
        converged = false;
    }

    Ok(HarmonicModel {
        k,
        period,
        beta0: beta[0],
        a: (0..k).map(|i| beta[1 + 2 * i]).collect(),
        b: (0..k).map(|i| beta[2 + 2 * i]).collect(),
        converged,
        deviance,
        n_obs: n,
    })
}

/// Spec-level entry point: binarize observed days and fit.
pub fn fit_occurrence_series(
    series: &DailySeries,
    threshold: f64,
    convention: YearConvention,
    k: usize,
) -> Result<HarmonicModel, SeasonalError> {
    fit_occurrence(&binarize(series, threshold, convention), k)
}

/// Mean absolute difference between two fitted occurrence curves over the
/// model year.
pub fn curve_distance(gauge: &HarmonicModel, product: &HarmonicModel) -> f64 {
    let mut total = 0.0;
    for t in 1..=PERIOD_DAYS {
        total += (gauge.predict(t as f64) - product.predict(t as f64)).abs();
    }
    total / PERIOD_DAYS as f64
}

/// One product threshold in a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub tr: f64,
    pub model: Option<HarmonicModel>,
    pub curve_distance: Option<f64>,
    pub error: Option<String>,
}

/// Result of a rain-day threshold sweep for one station/product pairing.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub gauge_model: HarmonicModel,
    pub rows: Vec<SweepRow>,
    /// Threshold minimizing the curve distance, among successful fits.
    pub best_tr: Option<f64>,
}

/// Fits the gauge occurrence once at its own threshold and the product at
/// each candidate threshold over the same mutually non-missing days.
///
/// A fit failure at one threshold is recorded in its row without aborting
/// the sweep; a failed gauge fit fails the whole sweep.
pub fn threshold_sweep(
    pairs: &PairedDailySeries,
    gauge_threshold: f64,
    product_thresholds: &[f64],
    k: usize,
    convention: YearConvention,
) -> Result<SweepResult, SeasonalError> {
    assert!(
        !product_thresholds.is_empty(),
        "threshold sweep needs at least one threshold"
    );
    let gauge_days = pairs.days().iter().map(|d| (d.date, d.gauge_mm));
    let gauge_occurrence =
        BinaryOccurrenceSeries::from_days(gauge_days, gauge_threshold, convention);
    let gauge_model = fit_occurrence(&gauge_occurrence, k)?;

    let mut thresholds: Vec<f64> = product_thresholds.to_vec();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rows = Vec::with_capacity(thresholds.len());
    let mut best: Option<(f64, f64)> = None;
    for tr in thresholds {
        let product_days = pairs.days().iter().map(|d| (d.date, d.product_mm));
        let occurrence = BinaryOccurrenceSeries::from_days(product_days, tr, convention);
        let row = match fit_occurrence(&occurrence, k) {
            Ok(model) if model.converged => {
                let distance = curve_distance(&gauge_model, &model);
                if best.is_none_or(|(_, d)| distance < d) {
                    best = Some((tr, distance));
                }
                SweepRow {
                    tr,
                    model: Some(model),
                    curve_distance: Some(distance),
                    error: None,
                }
            }
            Ok(model) => SweepRow {
                tr,
                model: Some(model),
                curve_distance: None,
                error: Some("fit did not converge".into()),
            },
            Err(err) => SweepRow {
                tr,
                model: None,
                curve_distance: None,
                error: Some(err.to_string()),
            },
        };
        rows.push(row);
    }

    Ok(SweepResult {
        gauge_model,
        rows,
        best_tr: best.map(|(tr, _)| tr),
    })
}
