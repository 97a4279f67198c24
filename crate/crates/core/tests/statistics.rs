mod common;

use whitney_core::chains::{run_walk, ChrKernel, MpKernel};
use whitney_core::diagnostics::{
    chi_square_uniformity, mixing_curve, tv_estimate, warmth, UniformityGrid, WhitneyHistogram, BIN_VOLUME_PROBES,
};
use whitney_core::rng::{seeded, stream_rng};
use whitney_core::{AxisBox, HPolytope, Norm, WhitneyContext};

fn square_histogram(depth: u32) -> (WhitneyContext<AxisBox>, WhitneyHistogram) {
    let ctx = WhitneyContext::new(AxisBox::centered_cube(2, 0.4).unwrap(), Norm::Inf);
    let cubes = ctx.enumerate_cubes(depth).unwrap().complete;
    let hist = WhitneyHistogram::new(cubes, 0.64).unwrap();
    (ctx, hist)
}

#[test]
fn warmth_of_uniform_on_an_inner_box() {
    // Uniform on [-1/4, 1/4]^2 inside the radius-0.4 square has density ratio
    // 0.64 / 0.25 on every bin it covers.
    let (ctx, mut hist) = square_histogram(4);
    let inner = AxisBox::centered_cube(2, 0.25).unwrap();
    let mut rng = seeded(4);
    for _ in 0..200_000 {
        let x = common::uniform_point(&inner, &mut rng);
        let q = ctx.locate_cube(&x).unwrap();
        hist.add(&q);
    }
    let report = warmth(hist.counts(), hist.pi(), "whitney depth 4").unwrap();
    let exact = 0.64 / 0.25;
    assert!((report.m_hat / exact - 1.0).abs() < 0.1, "{} vs {exact}", report.m_hat);
}

#[test]
fn exact_samples_have_small_binned_tv() {
    let (ctx, mut hist) = square_histogram(4);
    let mut rng = seeded(5);
    for _ in 0..100_000 {
        let x = common::uniform_point(ctx.body(), &mut rng);
        hist.add(&ctx.locate_cube(&x).unwrap());
    }
    let est = tv_estimate(&hist, &mut rng).unwrap();
    // Expected sampling bias is about sqrt(bins / N) / 2.
    assert!(est.tv < 0.02, "{est:?}");
    assert!(est.stderr > 0.0 && est.stderr < 0.01, "{est:?}");
}

#[test]
fn chi_square_is_calibrated_under_the_null() {
    let body = HPolytope::standard_simplex(2).unwrap();
    let grid = UniformityGrid::new(&body, 4, BIN_VOLUME_PROBES, 9).unwrap();
    let runs = 300;
    let mut rejected = 0;
    for r in 0..runs {
        let mut rng = stream_rng(10, r);
        let points: Vec<Vec<f64>> = (0..1000).map(|_| common::uniform_point(&body, &mut rng)).collect();
        if grid.test(&points).unwrap().p_value < 0.05 {
            rejected += 1;
        }
    }
    let rate = rejected as f64 / runs as f64;
    assert!((0.01..=0.10).contains(&rate), "rejection rate {rate}");
}

#[test]
fn chi_square_rejects_a_skewed_sample() {
    let body = AxisBox::centered_cube(2, 0.4).unwrap();
    let mut rng = seeded(12);
    let points: Vec<Vec<f64>> = (0..2000)
        .map(|_| {
            let mut x = common::uniform_point(&body, &mut rng);
            x[0] = x[0].abs();
            x
        })
        .collect();
    assert!(chi_square_uniformity(&points, &body, 4).unwrap().p_value < 1e-6);
}

#[test]
fn mixing_curve_decreases_and_replays() {
    let (ctx, hist) = square_histogram(3);
    let kernel = MpKernel { ctx: &ctx };
    let start = ctx.cube(3, [0, 0]);
    let checkpoints = [0, 25, 100, 400];
    let curve = |seed| {
        mixing_curve(&kernel, |_| start.clone(), |q| hist.bin_of(q), hist.pi(), &checkpoints, 2000, seed).unwrap()
    };
    let a = curve(1);
    assert_eq!(a, curve(1));
    assert!(a[0].tv > 0.9);
    assert!(a.windows(2).all(|w| w[1].tv < w[0].tv));
    assert!(a[3].tv < 0.1);
}

#[test]
fn chr_walk_replays_from_seed() {
    let body = HPolytope::standard_simplex(3).unwrap();
    let kernel = ChrKernel::new(&body);
    let a = run_walk(&kernel, vec![0.2; 3], 5000, 100, 77).unwrap();
    let b = run_walk(&kernel, vec![0.2; 3], 5000, 100, 77).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.states.len(), 51);
}
