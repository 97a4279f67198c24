//! Shared fixtures for the benchmarks.

use whitney_core::{AxisBox, HPolytope, Norm, WhitneyContext};

/// `[-0.4, 0.4]^n`.
pub fn square(n: usize) -> AxisBox {
    AxisBox::centered_cube(n, 0.4).expect("valid box")
}

pub fn simplex(n: usize) -> HPolytope {
    HPolytope::standard_simplex(n).expect("valid simplex")
}

pub fn square_context(n: usize, p: Norm) -> WhitneyContext<AxisBox> {
    WhitneyContext::new(square(n), p)
}

/// Deterministic interior points of the square, off every dyadic grid.
pub fn probe_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    let golden = 0.618_033_988_749_895;
    (0..count)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let t = ((i * n + k) as f64 * golden + 0.123_456_789).fract();
                    0.79 * t - 0.395
                })
                .collect()
        })
        .collect()
}
