//! Property tests for the cross-cutting invariants.

mod common;

use chrono::NaiveDate;
use common::date;
use proptest::prelude::*;
use rainval::grid::{haversine_km, nearest_cell, GridDescriptor, GriddedProduct, InputsClass};
use rainval::metrics::{classify_intensity, pbias, pearson_r, rain_day_contingency_values};
use rainval::pairing::{align, annual_summaries, YearConvention, DEFAULT_MIN_VALID_DAYS};
use rainval::qc::{run_qc, QcConfig};
use rainval::seasonal::{fit_occurrence, BinaryOccurrenceSeries, HarmonicModel};
use rainval::series::{DailySeries, DayStatus};

fn day_status() -> impl Strategy<Value = DayStatus> {
    prop_oneof![
        3 => (0.0f64..60.0).prop_map(DayStatus::Observed),
        2 => Just(DayStatus::Observed(0.0)),
        1 => Just(DayStatus::Missing),
    ]
}

fn daily_series(min_len: usize, max_len: usize) -> impl Strategy<Value = DailySeries> {
    prop::collection::vec(day_status(), min_len..=max_len)
        .prop_map(|entries| DailySeries::new("S", date(2000, 1, 1), entries))
}

proptest! {
    #[test]
    fn pbias_scale_identity(
        gauge in prop::collection::vec(0.1f64..80.0, 2..50),
        lambda in 0.1f64..5.0,
    ) {
        let product: Vec<f64> = gauge.iter().map(|o| lambda * o).collect();
        let expected = 100.0 * (lambda - 1.0);
        let got = pbias(&product, &gauge).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn pearson_is_invariant_under_positive_affine_maps(
        pairs in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0), 3..40),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let (product, gauge): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let transformed: Vec<f64> = product.iter().map(|v| scale * v + shift).collect();
        match (pearson_r(&product, &gauge), pearson_r(&transformed, &gauge)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}"),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "definedness diverged: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn contingency_cells_partition_the_days(
        pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..80),
        threshold in 0.1f64..5.0,
    ) {
        let (gauge, product): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let table = rain_day_contingency_values(&gauge, &product, threshold);
        prop_assert_eq!(table.n(), gauge.len() as u64);
    }

    #[test]
    fn intensity_classification_is_monotone(a in 0.0f64..80.0, b in 0.0f64..80.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(classify_intensity(lo) <= classify_intensity(hi));
    }

    #[test]
    fn qc_is_idempotent_and_preserves_values(series in daily_series(40, 400)) {
        let config = QcConfig {
            wet_months: [1].into_iter().collect(),
            max_daily_mm: 40.0, // exercise the extreme rule
            min_identical_value: 0.5,
            ..QcConfig::default()
        };
        let (once, report_once) = run_qc(&series, &config);
        let (twice, report_twice) = run_qc(&once, &config);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(report_once.counts, report_twice.counts);
        prop_assert!(report_once.completeness_after <= report_once.completeness_before);

        // No value is mutated: observed stays, flags keep the original.
        for (input, output) in series.entries().iter().zip(once.entries()) {
            match (*input, *output) {
                (DayStatus::Observed(a), DayStatus::Observed(b)) => prop_assert_eq!(a, b),
                (DayStatus::Observed(a), DayStatus::Flagged { original_value, .. }) => {
                    prop_assert_eq!(a, original_value)
                }
                (DayStatus::Missing, DayStatus::Missing) => {}
                (i, o) => prop_assert!(false, "unexpected transition {i:?} -> {o:?}"),
            }
        }
    }

    #[test]
    fn aligned_pairs_preserve_source_values(
        gauge in daily_series(10, 120),
        product in daily_series(10, 120),
    ) {
        let pairs = align(&gauge, &product, "P");
        let mut previous: Option<NaiveDate> = None;
        for day in pairs.days() {
            prop_assert_eq!(gauge.get(day.date).unwrap().observed(), Some(day.gauge_mm));
            prop_assert_eq!(product.get(day.date).unwrap().observed(), Some(day.product_mm));
            if let Some(p) = previous {
                prop_assert!(day.date > p, "dates must increase");
            }
            previous = Some(day.date);
        }
    }

    #[test]
    fn annual_totals_conserve_observed_mass(
        series in daily_series(400, 900),
        start_month in 1u32..=12,
    ) {
        let convention = YearConvention::new(start_month).unwrap();
        let summaries = annual_summaries(&series, 0.85, convention, DEFAULT_MIN_VALID_DAYS);
        let total: f64 = summaries.iter().map(|s| s.total_rain).sum();
        let direct: f64 = series.observed_days().map(|(_, v)| v).sum();
        prop_assert!((total - direct).abs() <= 1e-9 * direct.max(1.0));

        // Year labels partition the range into contiguous runs.
        let labels: Vec<i32> = series.days().map(|(d, _)| convention.assign_year(d)).collect();
        for w in labels.windows(2) {
            prop_assert!(w[1] == w[0] || w[1] == w[0] + 1);
        }
    }

    #[test]
    fn grid_payload_round_trips(
        values in prop::collection::vec(
            prop_oneof![3 => 0.0f32..500.0, 1 => Just(-999.0f32)],
            1..64,
        ),
    ) {
        let ntime = values.len();
        let descriptor = GridDescriptor {
            lat0: -15.0,
            lon0: 25.0,
            dlat: 0.5,
            dlon: 0.5,
            nlat: 1,
            nlon: 1,
            time_start: date(2000, 1, 1),
            ntime,
            missing_sentinel: -999.0,
        };
        let payload: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        let descriptor_json = serde_json::to_string_pretty(&descriptor).unwrap();
        let product = GriddedProduct::load("P", InputsClass::Satellite, &descriptor_json, &payload).unwrap();
        prop_assert_eq!(product.write_payload(), payload);
        prop_assert_eq!(product.write_descriptor(), descriptor_json);
    }

    #[test]
    fn nearest_cell_minimizes_distance_over_all_cells(
        nlat in 1usize..8,
        nlon in 1usize..8,
        lat in -60.0f64..10.0,
        lon in 0.0f64..60.0,
        dlat in 0.05f64..2.0,
        dlon in 0.05f64..2.0,
    ) {
        let descriptor = GridDescriptor {
            lat0: -40.0,
            lon0: 20.0,
            dlat,
            dlon,
            nlat,
            nlon,
            time_start: date(2000, 1, 1),
            ntime: 1,
            missing_sentinel: -999.0,
        };
        let (row, col, distance) = nearest_cell(&descriptor, lat, lon);
        for i in 0..nlat {
            for j in 0..nlon {
                let other = haversine_km(lat, lon, descriptor.lat_at(i), descriptor.lon_at(j));
                prop_assert!(distance <= other + 1e-12);
            }
        }
        prop_assert!(row < nlat && col < nlon);
    }

    #[test]
    fn predictions_are_periodic(
        beta0 in -3.0f64..3.0,
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
        t in 1.0f64..365.0,
    ) {
        let model = HarmonicModel {
            k: 3,
            period: 365.0,
            beta0,
            a,
            b,
            converged: true,
            deviance: 0.0,
            n_obs: 0,
        };
        prop_assert!((model.predict(t) - model.predict(t + 365.0)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn intercept_only_fit_matches_empirical_proportion(
        outcomes in prop::collection::vec(prop::bool::ANY, 40..600),
    ) {
        let wet = outcomes.iter().filter(|w| **w).count();
        prop_assume!(wet > 0 && wet < outcomes.len());
        let series = BinaryOccurrenceSeries {
            day_index: (0..outcomes.len()).map(|i| (i % 365) as u32 + 1).collect(),
            outcome: outcomes.clone(),
            threshold: 0.85,
            year_convention: YearConvention::CALENDAR,
        };
        let model = fit_occurrence(&series, 0).unwrap();
        let p_hat = wet as f64 / outcomes.len() as f64;
        let expected = (p_hat / (1.0 - p_hat)).ln();
        prop_assert!((model.beta0 - expected).abs() <= 1e-10, "{} vs {expected}", model.beta0);
    }

    #[test]
    fn refitting_identical_data_is_bitwise_stable(
        outcomes in prop::collection::vec(prop::bool::ANY, 120..400),
    ) {
        let wet = outcomes.iter().filter(|w| **w).count();
        prop_assume!(wet > 5 && wet < outcomes.len() - 5);
        let series = BinaryOccurrenceSeries {
            day_index: (0..outcomes.len()).map(|i| (i * 7 % 365) as u32 + 1).collect(),
            outcome: outcomes,
            threshold: 0.85,
            year_convention: YearConvention::CALENDAR,
        };
        let first = fit_occurrence(&series, 1).unwrap();
        let second = fit_occurrence(&series, 1).unwrap();
        for (a, b) in first.coefficients().iter().zip(second.coefficients()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(first.deviance.to_bits(), second.deviance.to_bits());
    }
}
