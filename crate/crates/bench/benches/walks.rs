use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use whitney_bench::{probe_points, simplex, square_context};
use whitney_core::chains::{chr_step, mp_step, CHR_RELATIVE_TOL};
use whitney_core::rng::seeded;
use whitney_core::{ConvexBody, Norm};

fn locate(c: &mut Criterion) {
    let mut group = c.benchmark_group("locate_cube");
    for (n, p) in [(2, Norm::Inf), (2, Norm::L1), (5, Norm::Inf)] {
        let ctx = square_context(n, p);
        let points = probe_points(n, 256);
        group.bench_with_input(BenchmarkId::new(format!("p={p}"), n), &points, |b, points| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % points.len();
                black_box(ctx.locate_cube(&points[i]).unwrap())
            })
        });
    }
    group.finish();
}

fn mp(c: &mut Criterion) {
    let mut group = c.benchmark_group("mp_step");
    for n in [2, 5] {
        let ctx = square_context(n, Norm::Inf);
        let start = ctx.locate_cube(&probe_points(n, 1)[0]).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            let mut rng = seeded(1);
            let mut q = start.clone();
            b.iter(|| {
                q = mp_step(&ctx, &q, &mut rng).unwrap();
            })
        });
    }
    group.finish();
}

fn chr(c: &mut Criterion) {
    let mut group = c.benchmark_group("chr_step");
    for n in [2, 10] {
        let body = simplex(n);
        let tol = CHR_RELATIVE_TOL * body.outer_radius();
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            let mut rng = seeded(2);
            let mut x = body.reference_point();
            b.iter(|| {
                x = chr_step(&body, &x, &mut rng, tol).unwrap();
            })
        });
    }
    group.finish();
}

criterion_group!(benches, locate, mp, chr);
criterion_main!(benches);
