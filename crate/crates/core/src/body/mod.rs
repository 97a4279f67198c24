//! Convex bodies given by membership oracles, with optional closed-form
//! distance and chord capabilities.
//!
//! Every body answers membership. Concrete shapes ([`AxisBox`], [`LpBall`],
//! [`HPolytope`]) additionally report exact `ℓ_p` depths and axis chords;
//! a body that only answers membership (see [`MembershipOnly`]) gets the
//! `ℓ_1` distance through `2n` axis ray searches.

mod polytope;
mod shapes;
mod spec;

pub use polytope::HPolytope;
pub use shapes::{AxisBox, LpBall, MembershipOnly};
pub use spec::{parse_body_json, AnyBody, BodySpec};

use crate::error::{Error, Result};
use crate::norm::Norm;

/// Default precision budget for bisection-based answers, in bits.
pub const DEFAULT_PRECISION_BITS: u32 = 52;

/// A distance answer, tagged with whether it is exact or a bisection estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Exact(f64),
    /// Within a `2^{±0.01}` factor of the true value.
    Approx(f64),
}

impl Distance {
    pub fn value(self) -> f64 {
        match self {
            Distance::Exact(d) | Distance::Approx(d) => d,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Distance::Exact(_))
    }
}

/// A convex body `K ⊂ ℝ^n` with sandwich radii `r_p·B_p + z ⊆ K ⊆ R_∞·B_∞`,
/// where `z` is [`ConvexBody::reference_point`].
///
/// Implementors supply `membership` and the radii; the `exact_*` hooks are
/// capabilities that default to "not available". The public operations
/// (`contains`, `lp_distance_to_boundary`, ...) are provided methods that
/// validate their input and pick the exact route when there is one.
pub trait ConvexBody: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    /// Raw membership test. Points on the boundary may answer either way.
    fn membership(&self, x: &[f64]) -> bool;

    /// `R_∞`: every member satisfies `‖x‖_∞ ≤ R_∞`.
    fn outer_radius(&self) -> f64;

    /// Interior point about which inner radii are measured.
    fn reference_point(&self) -> Vec<f64>;

    /// Largest `r` (or a lower bound on it) with `z + r·B_p ⊆ K`.
    fn inner_radius(&self, p: Norm) -> f64;

    fn precision_bits(&self) -> u32 {
        DEFAULT_PRECISION_BITS
    }

    /// Exact volume, when known in closed form.
    fn volume(&self) -> Option<f64> {
        None
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.outer_radius();
        (vec![-r; self.dim()], vec![r; self.dim()])
    }

    /// Signed depth: `dist_p(x, ℝ^n \ K°)` when positive, non-positive when
    /// `x ∉ K°`. `None` if no closed form exists for this `p`.
    fn exact_depth(&self, _x: &[f64], _p: Norm) -> Option<f64> {
        None
    }

    /// Closed-form chord `(t_-, t_+)` of `x + t e_axis` for interior `x`.
    /// `None` if unavailable or if `x` is not interior.
    fn exact_chord(&self, _x: &[f64], _axis: usize) -> Option<(f64, f64)> {
        None
    }

    /// Exact `dist_p(x, K)` for points outside `K`.
    fn exact_exterior_distance(&self, _x: &[f64], _p: Norm) -> Option<f64> {
        None
    }

    /// `Some(false)` only when the closed box `[lo, hi]` is certainly disjoint
    /// from `K°`; `Some(true)` when it certainly meets it.
    fn exact_box_meets_interior(&self, _lo: &[f64], _hi: &[f64]) -> Option<bool> {
        None
    }

    // ----- provided operations -----

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.membership(x))
    }

    /// Smallest distance the approximate oracle will certify.
    fn margin(&self) -> f64 {
        self.outer_radius().max(1.0) * (-(self.precision_bits() as f64) + 7.0).exp2()
    }

    /// `dist_p(x, ∂K)` for `x ∈ K°`.
    fn lp_distance_to_boundary(&self, x: &[f64], p: Norm) -> Result<Distance> {
        self.check_dim(x)?;
        if let Some(d) = self.exact_depth(x, p) {
            return if d > 0.0 {
                Ok(Distance::Exact(d))
            } else {
                Err(Error::NotInterior)
            };
        }
        if !p.is_l1() {
            return Err(Error::Unsupported(format!(
                "l_{p} distance needs a closed-form body; membership-only bodies support p = 1"
            )));
        }
        if !self.membership(x) {
            return Err(Error::NotInterior);
        }
        let iters = self.precision_bits() + 8;
        let mut best = f64::INFINITY;
        for axis in 0..self.dim() {
            for sign in [-1.0, 1.0] {
                let (inside, _) = ray_exit(self, x, axis, sign, iters);
                best = best.min(inside);
            }
        }
        if best < self.margin() {
            return Err(Error::TooCloseToBoundary { margin: self.margin() });
        }
        Ok(Distance::Approx(best))
    }

    /// Whether `dist_p(x, ℝ^n \ K°) > gamma`.
    fn lp_distance_exceeds(&self, x: &[f64], gamma: f64, p: Norm) -> Result<bool> {
        self.check_dim(x)?;
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if let Some(d) = self.exact_depth(x, p) {
            return Ok(d > gamma);
        }
        if !p.is_l1() {
            return Err(Error::Unsupported(format!(
                "l_{p} distance inequality needs a closed-form body"
            )));
        }
        // The l1 ball is the hull of its 2n vertices x ± γ e_i.
        let mut y = x.to_vec();
        for axis in 0..self.dim() {
            for sign in [-1.0, 1.0] {
                y[axis] = x[axis] + sign * gamma;
                if !self.membership(&y) {
                    return Ok(false);
                }
            }
            y[axis] = x[axis];
        }
        Ok(true)
    }

    /// Chord of the line `x + t e_axis` through `K`, as `(t_-, t_+)`.
    fn chord_endpoints(&self, x: &[f64], axis: usize, tol: f64) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        if axis >= self.dim() {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if let Some((lo, hi)) = self.exact_chord(x, axis) {
            return Ok((lo, hi));
        }
        if !self.membership(x) {
            return Err(Error::NotInterior);
        }
        let span = 2.0 * self.outer_radius() + x[axis].abs();
        let iters = ((span / tol).log2().ceil().max(1.0) as u32).min(1100);
        let (_, plus) = ray_exit(self, x, axis, 1.0, iters);
        let (_, minus) = ray_exit(self, x, axis, -1.0, iters);
        if plus <= 0.0 || minus <= 0.0 {
            return Err(Error::NotInterior);
        }
        Ok((-minus, plus))
    }
}

/// Bisects along `x + t·sign·e_axis` for `t ≥ 0`, returning `(t_in, t_out)`
/// with the point at `t_in` a member and the point at `t_out` not.
pub(crate) fn ray_exit<B: ConvexBody + ?Sized>(
    body: &B,
    x: &[f64],
    axis: usize,
    sign: f64,
    iters: u32,
) -> (f64, f64) {
    let r = body.outer_radius();
    // Every point with a coordinate beyond R_∞ is outside.
    let mut hi = r + x[axis].abs() + r.max(1.0) * 1e-9;
    let mut lo = 0.0;
    let mut y = x.to_vec();
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        y[axis] = x[axis] + sign * mid;
        if body.membership(&y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Whether the closed box `[lo, hi]` may meet `K°`.
///
/// Answers `true` whenever it cannot rule the intersection out, so callers
/// may over-approximate but never miss interior points.
pub fn box_may_meet_interior<B: ConvexBody + ?Sized>(body: &B, lo: &[f64], hi: &[f64]) -> bool {
    if let Some(ans) = body.exact_box_meets_interior(lo, hi) {
        return ans;
    }
    let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    if body.membership(&c) {
        return true;
    }
    // A supporting hyperplane at the boundary point b = z + t(c - z) lies at
    // l2 distance at least r_2 from z, hence dist_2(c, K) ≥ r_2 (1/t - 1).
    let z = body.reference_point();
    let r2 = body.inner_radius(Norm::L2);
    let (_, t_out) = segment_exit(body, &z, &c, body.precision_bits() + 8);
    let lower = r2 * (1.0 / t_out - 1.0);
    let half_diag = 0.5 * Norm::L2.dist(lo, hi);
    lower <= half_diag
}

/// Upper bound on `dist_p(x, K)`: exact when the body has a closed form,
/// otherwise the distance to a member found on the segment towards the
/// reference point.
pub fn exterior_distance_upper<B: ConvexBody + ?Sized>(body: &B, x: &[f64], p: Norm) -> f64 {
    if body.membership(x) {
        return 0.0;
    }
    if let Some(d) = body.exact_exterior_distance(x, p) {
        return d;
    }
    let z = body.reference_point();
    let (t_in, _) = segment_exit(body, &z, x, body.precision_bits() + 8);
    (1.0 - t_in) * p.dist(x, &z)
}

/// Bisects on the segment `z + t (c - z)`, `t ∈ [0, 1]`, with `z` a member and
/// `c` not; returns `(t_in, t_out)`.
fn segment_exit<B: ConvexBody + ?Sized>(body: &B, z: &[f64], c: &[f64], iters: u32) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut y = vec![0.0; z.len()];
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        for i in 0..z.len() {
            y[i] = z[i] + mid * (c[i] - z[i]);
        }
        if body.membership(&y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

impl<B: ConvexBody + ?Sized> ConvexBody for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn membership(&self, x: &[f64]) -> bool {
        (**self).membership(x)
    }

    fn outer_radius(&self) -> f64 {
        (**self).outer_radius()
    }

    fn reference_point(&self) -> Vec<f64> {
        (**self).reference_point()
    }

    fn inner_radius(&self, p: Norm) -> f64 {
        (**self).inner_radius(p)
    }

    fn precision_bits(&self) -> u32 {
        (**self).precision_bits()
    }

    fn volume(&self) -> Option<f64> {
        (**self).volume()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (**self).bounds()
    }

    fn exact_depth(&self, x: &[f64], p: Norm) -> Option<f64> {
        (**self).exact_depth(x, p)
    }

    fn exact_chord(&self, x: &[f64], axis: usize) -> Option<(f64, f64)> {
        (**self).exact_chord(x, axis)
    }

    fn exact_exterior_distance(&self, x: &[f64], p: Norm) -> Option<f64> {
        (**self).exact_exterior_distance(x, p)
    }

    fn exact_box_meets_interior(&self, lo: &[f64], hi: &[f64]) -> Option<bool> {
        (**self).exact_box_meets_interior(lo, hi)
    }
}
