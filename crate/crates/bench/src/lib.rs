//! Shared inputs for the criterion benchmarks.

use agrobio::{ModelParams, SizeBin, SizeHistogram};

/// Size histogram with the same shape as the shipped 1990 census fixture.
pub fn census_like_histogram() -> SizeHistogram {
    SizeHistogram::new(vec![
        SizeBin { low: 0.5, high: 5.0, count: 60_000.0 },
        SizeBin { low: 5.0, high: 10.0, count: 40_000.0 },
        SizeBin { low: 10.0, high: 20.0, count: 50_000.0 },
        SizeBin { low: 20.0, high: 50.0, count: 89_000.0 },
        SizeBin { low: 50.0, high: 100.0, count: 45_000.0 },
        SizeBin { low: 100.0, high: 200.0, count: 14_000.0 },
        SizeBin { low: 200.0, high: 500.0, count: 2_000.0 },
    ])
    .expect("valid histogram")
}

pub fn desk_params() -> ModelParams {
    ModelParams::default().desk_scale()
}
