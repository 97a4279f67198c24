//! Reference computations shared by the integration tests. Nothing here calls
//! the distance or transition code under test.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rand_distr::StandardNormal;
use whitney_core::whitney::DyadicCube;
use whitney_core::{ConvexBody, HPolytope, Norm, WhitneyContext};

/// `‖v‖_p`, written out independently of `Norm::of`.
pub fn lp_norm(v: &[f64], p: Norm) -> f64 {
    match p {
        Norm::Inf => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
        Norm::P(e) => v.iter().map(|x| x.abs().powf(e)).sum::<f64>().powf(1.0 / e),
    }
}

const GOLDEN_ITERS: usize = 120;

/// Minimum of a convex function on `[lo, hi]` by golden-section search.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..GOLDEN_ITERS {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    f(0.5 * (lo + hi)).min(fa).min(fb)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Orthonormal basis of `a^⊥` by Gram-Schmidt on the coordinate axes.
fn complement_basis(a: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len();
    let na = dot(a, a).sqrt();
    let mut basis: Vec<Vec<f64>> = vec![a.iter().map(|v| v / na).collect()];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for k in 0..n {
                e[k] -= c * b[k];
            }
        }
        let norm = dot(&e, &e).sqrt();
        if norm > 1e-8 {
            basis.push(e.iter().map(|v| v / norm).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// `min ‖y - x‖_p` over the hyperplane `a·y = b`, by nested golden-section
/// search over the hyperplane's coordinates (a convex problem). Supports
/// `n ≤ 3`.
pub fn hyperplane_distance(x: &[f64], a: &[f64], b: f64, p: Norm) -> f64 {
    let n = x.len();
    assert!((2..=3).contains(&n), "oracle supports n = 2, 3");
    let aa = dot(a, a);
    let t = (b - dot(a, x)) / aa;
    let foot: Vec<f64> = a.iter().map(|ai| t * ai).collect();
    let d2 = dot(&foot, &foot).sqrt();
    let basis = complement_basis(a);
    let span = 4.0 * n as f64 * d2 + 1e-300;
    let eval = |coords: &[f64]| {
        let mut v = foot.clone();
        for (c, e) in coords.iter().zip(&basis) {
            for k in 0..n {
                v[k] += c * e[k];
            }
        }
        lp_norm(&v, p)
    };
    if n == 2 {
        golden_min(|s| eval(&[s]), -span, span)
    } else {
        golden_min(|s| golden_min(|u| eval(&[s, u]), -span, span), -span, span)
    }
}

/// `dist_p(x, ∂K)` for an H-polytope and interior `x`, as the smallest
/// distance to a facet hyperplane.
pub fn polytope_distance(poly: &HPolytope, x: &[f64], p: Norm) -> f64 {
    poly.normals()
        .iter()
        .zip(poly.offsets())
        .map(|(a, b)| hyperplane_distance(x, a, *b, p))
        .fold(f64::INFINITY, f64::min)
}

/// A random bounded polytope around the origin with `m` facets.
pub fn random_polytope<R: Rng>(rng: &mut R, n: usize, m: usize) -> HPolytope {
    loop {
        let normals: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dot(&v, &v).sqrt();
                v.iter().map(|x| x / norm).collect()
            })
            .collect();
        let offsets: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..0.9)).collect();
        if let Ok(poly) = HPolytope::new(normals, offsets, vec![0.0; n]) {
            if poly.outer_radius() < 5.0 {
                return poly;
            }
        }
    }
}

/// Uniform point of `K` by rejection from its bounding box.
pub fn uniform_point<B: ConvexBody + ?Sized, R: Rng>(body: &B, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = body.bounds();
    loop {
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.random_range(*l..*h)).collect();
        if body.membership(&x) {
            return x;
        }
    }
}

/// Every cube of `cubes` whose open interior holds `x`, found by scanning
/// all levels up to `depth`.
pub fn containing_cubes<B: ConvexBody>(
    ctx: &WhitneyContext<B>,
    cubes: &HashSet<DyadicCube>,
    x: &[f64],
    depth: u32,
) -> Vec<DyadicCube> {
    (0..=depth)
        .filter_map(|level| ctx.floor_cube(x, level).ok())
        .filter(|q| cubes.contains(q))
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
