//! Fixed float formatting for byte-deterministic outputs.
//!
//! All emitted CSV/JSON values are rounded to six significant digits and
//! printed in plain decimal, so reruns on identical inputs produce
//! byte-identical files.

/// Rounds to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("scientific round-trip")
}

/// Six-significant-digit decimal rendering; `0` for both zeros.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{}", round_sig6(x))
}

/// Renders an optional value, empty when absent.
pub fn fmt_opt_sig6(x: Option<f64>) -> String {
    x.map(fmt_sig6).unwrap_or_default()
}
