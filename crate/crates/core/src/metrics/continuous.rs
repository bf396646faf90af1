//! Continuous agreement scores between product and gauge vectors.
//!
//! All four scores take the product series first and the gauge series
//! second; positive bias means the product overestimates.

use super::{AbsentReason, MetricResult};
use serde::Serialize;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (divisor N−1).
fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Average product-minus-gauge difference, in the units of the input.
pub fn mean_error(product: &[f64], gauge: &[f64]) -> MetricResult {
    assert_eq!(product.len(), gauge.len(), "paired vectors must match");
    if product.is_empty() {
        return Err(AbsentReason::NoPairs);
    }
    let sum: f64 = product.iter().zip(gauge).map(|(s, o)| s - o).sum();
    Ok(sum / product.len() as f64)
}

/// Total product-minus-gauge difference as a percentage of the gauge total.
pub fn pbias(product: &[f64], gauge: &[f64]) -> MetricResult {
    assert_eq!(product.len(), gauge.len(), "paired vectors must match");
    if product.is_empty() {
        return Err(AbsentReason::NoPairs);
    }
    let gauge_sum: f64 = gauge.iter().sum();
    if gauge_sum <= 0.0 {
        return Err(AbsentReason::ZeroGaugeSum);
    }
    let diff_sum: f64 = product.iter().zip(gauge).map(|(s, o)| s - o).sum();
    Ok(100.0 * diff_sum / gauge_sum)
}

/// Product-moment correlation, clamped to [-1, 1] against rounding.
pub fn pearson_r(product: &[f64], gauge: &[f64]) -> MetricResult {
    assert_eq!(product.len(), gauge.len(), "paired vectors must match");
    if product.len() < 2 {
        return Err(AbsentReason::TooFewPairs);
    }
    let ms = mean(product);
    let mo = mean(gauge);
    let mut cov = 0.0;
    let mut var_s = 0.0;
    let mut var_o = 0.0;
    for (s, o) in product.iter().zip(gauge) {
        let ds = s - ms;
        let dob = o - mo;
        cov += ds * dob;
        var_s += ds * ds;
        var_o += dob * dob;
    }
    if var_o == 0.0 {
        return Err(AbsentReason::ZeroGaugeVariance);
    }
    if var_s == 0.0 {
        return Err(AbsentReason::ZeroProductVariance);
    }
    Ok((cov / (var_s.sqrt() * var_o.sqrt())).clamp(-1.0, 1.0))
}

/// Ratio of product to gauge sample standard deviation.
pub fn rsd(product: &[f64], gauge: &[f64]) -> MetricResult {
    assert_eq!(product.len(), gauge.len(), "paired vectors must match");
    if product.len() < 2 {
        return Err(AbsentReason::TooFewPairs);
    }
    let sigma_o = sample_std(gauge);
    if sigma_o == 0.0 {
        return Err(AbsentReason::ZeroGaugeVariance);
    }
    Ok(sample_std(product) / sigma_o)
}

/// Bundle of the four continuous scores for one paired vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousScores {
    pub n: usize,
    pub me: MetricResult,
    pub pbias: MetricResult,
    pub r: MetricResult,
    pub rsd: MetricResult,
}

impl ContinuousScores {
    pub fn compute(product: &[f64], gauge: &[f64]) -> ContinuousScores {
        ContinuousScores {
            n: product.len(),
            me: mean_error(product, gauge),
            pbias: pbias(product, gauge),
            r: pearson_r(product, gauge),
            rsd: rsd(product, gauge),
        }
    }

    /// All four metrics absent for the same reason (e.g. too few years).
    pub fn absent(n: usize, reason: AbsentReason) -> ContinuousScores {
        ContinuousScores {
            n,
            me: Err(reason),
            pbias: Err(reason),
            r: Err(reason),
            rsd: Err(reason),
        }
    }

    pub fn fields(&self) -> [(&'static str, MetricResult); 4] {
        [
            ("me", self.me),
            ("pbias", self.pbias),
            ("r", self.r),
            ("rsd", self.rsd),
        ]
    }
}
