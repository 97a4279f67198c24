use statrs::function::gamma::ln_gamma;

use super::ConvexBody;
use crate::error::{Error, Result};
use crate::norm::Norm;

/// The box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid_body("lower", "dimension must be positive"));
        }
        if lower.len() != upper.len() {
            return Err(Error::invalid_body(
                "upper",
                format!("length {} differs from lower ({})", upper.len(), lower.len()),
            ));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::invalid_body(
                    "upper",
                    format!("need finite lower < upper on axis {i}, got [{l}, {u}]"),
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[-h, h]^n`.
    pub fn centered_cube(n: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; n], vec![half_width; n])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Volume of `[lo, hi] ∩ K`.
    pub fn intersection_volume(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let mut v = 1.0;
        for i in 0..self.lower.len() {
            let w = hi[i].min(self.upper[i]) - lo[i].max(self.lower[i]);
            if w <= 0.0 {
                return 0.0;
            }
            v *= w;
        }
        v
    }
}

impl ConvexBody for AxisBox {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn membership(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    fn outer_radius(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.upper)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    fn reference_point(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    fn inner_radius(&self, _p: Norm) -> f64 {
        // An l_p ball reaches exactly its radius along each axis.
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(f64::INFINITY, |m, (l, u)| m.min(0.5 * (u - l)))
    }

    fn volume(&self) -> Option<f64> {
        Some(self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product())
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lower.clone(), self.upper.clone())
    }

    fn exact_depth(&self, x: &[f64], _p: Norm) -> Option<f64> {
        // The nearest exit of a box is along an axis, where all l_p agree.
        Some(
            x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .fold(f64::INFINITY, |m, (v, (l, u))| m.min(v - l).min(u - v)),
        )
    }

    fn exact_chord(&self, x: &[f64], axis: usize) -> Option<(f64, f64)> {
        if self.exact_depth(x, Norm::Inf)? <= 0.0 {
            return None;
        }
        Some((self.lower[axis] - x[axis], self.upper[axis] - x[axis]))
    }

    fn exact_exterior_distance(&self, x: &[f64], p: Norm) -> Option<f64> {
        let diff: Vec<f64> = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| v - v.clamp(*l, *u))
            .collect();
        Some(p.of(&diff))
    }

    fn exact_box_meets_interior(&self, lo: &[f64], hi: &[f64]) -> Option<bool> {
        Some((0..self.dim()).all(|i| lo[i] < self.upper[i] && hi[i] > self.lower[i]))
    }
}

/// The ball `{x : ‖x - center‖_q ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpBall {
    center: Vec<f64>,
    radius: f64,
    exponent: Norm,
}

impl LpBall {
    pub fn new(center: Vec<f64>, radius: f64, exponent: Norm) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid_body("center", "dimension must be positive"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid_body("center", "coordinates must be finite"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid_body("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self {
            center,
            radius,
            exponent,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn exponent(&self) -> Norm {
        self.exponent
    }

    fn offset(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, c)| a - c).collect()
    }

    /// Half-length of the chord through `y = x - center` along `axis`,
    /// centred at `-y_axis`; `None` if the line misses the open ball.
    fn chord_half(&self, y: &[f64], axis: usize) -> Option<f64> {
        match self.exponent {
            Norm::Inf => {
                let rest = y
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != axis)
                    .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
                (rest < self.radius).then_some(self.radius)
            }
            Norm::P(q) => {
                let rest: f64 = y
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != axis)
                    .map(|(_, v)| v.abs().powf(q))
                    .sum();
                let left = self.radius.powf(q) - rest;
                (left > 0.0).then(|| left.powf(1.0 / q))
            }
        }
    }
}

impl ConvexBody for LpBall {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn membership(&self, x: &[f64]) -> bool {
        self.exponent.of(&self.offset(x)) <= self.radius
    }

    fn outer_radius(&self) -> f64 {
        self.center
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
            + self.radius
    }

    fn reference_point(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn inner_radius(&self, p: Norm) -> f64 {
        // ‖u‖_q ≤ ‖u‖_p when p ≤ q, else ‖u‖_q ≤ n^{1/q - 1/p} ‖u‖_p.
        let (rp, rq) = (p.reciprocal(), self.exponent.reciprocal());
        if rp >= rq {
            self.radius
        } else {
            self.radius * (self.dim() as f64).powf(rp - rq)
        }
    }

    fn volume(&self) -> Option<f64> {
        let n = self.dim() as f64;
        let unit = match self.exponent {
            Norm::Inf => 2f64.powf(n),
            Norm::P(q) => (n * (std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / q)) - ln_gamma(1.0 + n / q)).exp(),
        };
        Some(unit * self.radius.powf(n))
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.center.iter().map(|c| c - self.radius).collect(),
            self.center.iter().map(|c| c + self.radius).collect(),
        )
    }

    fn exact_depth(&self, x: &[f64], p: Norm) -> Option<f64> {
        let y = self.offset(x);
        let signed = self.radius - self.exponent.of(&y);
        if p == self.exponent || signed <= 0.0 {
            return Some(signed);
        }
        if p.is_l1() {
            // The largest l1 ball is limited by its vertices on the axis chords.
            let mut best = f64::INFINITY;
            for axis in 0..y.len() {
                let h = self.chord_half(&y, axis)?;
                best = best.min(h - y[axis].abs());
            }
            return Some(best);
        }
        if p == Norm::Inf && self.exponent == Norm::L2 {
            // Largest cube: its worst corner lies along sign(y).
            let n = y.len() as f64;
            let l1 = Norm::L1.of(&y);
            let l2sq: f64 = y.iter().map(|v| v * v).sum();
            let disc = l1 * l1 - n * (l2sq - self.radius * self.radius);
            return Some((-l1 + disc.sqrt()) / n);
        }
        None
    }

    fn exact_chord(&self, x: &[f64], axis: usize) -> Option<(f64, f64)> {
        let y = self.offset(x);
        let h = self.chord_half(&y, axis)?;
        let (lo, hi) = (-h - y[axis], h - y[axis]);
        (lo < 0.0 && hi > 0.0).then_some((lo, hi))
    }

    fn exact_exterior_distance(&self, x: &[f64], p: Norm) -> Option<f64> {
        (p == self.exponent).then(|| (p.of(&self.offset(x)) - self.radius).max(0.0))
    }

    fn exact_box_meets_interior(&self, lo: &[f64], hi: &[f64]) -> Option<bool> {
        // The box point nearest the centre, coordinatewise, minimises every l_q.
        let near: Vec<f64> = (0..self.dim())
            .map(|i| self.center[i].clamp(lo[i], hi[i]) - self.center[i])
            .collect();
        Some(self.exponent.of(&near) < self.radius)
    }
}

/// Hides every closed-form capability of the wrapped body, leaving only
/// membership and the sandwich radii.
#[derive(Debug, Clone)]
pub struct MembershipOnly<B>(pub B);

impl<B: ConvexBody> ConvexBody for MembershipOnly<B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn membership(&self, x: &[f64]) -> bool {
        self.0.membership(x)
    }

    fn outer_radius(&self) -> f64 {
        self.0.outer_radius()
    }

    fn reference_point(&self) -> Vec<f64> {
        self.0.reference_point()
    }

    fn inner_radius(&self, p: Norm) -> f64 {
        self.0.inner_radius(p)
    }

    fn precision_bits(&self) -> u32 {
        self.0.precision_bits()
    }

    fn volume(&self) -> Option<f64> {
        self.0.volume()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.0.bounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> AxisBox {
        AxisBox::centered_cube(2, 1.0).unwrap()
    }

    #[test]
    fn box_membership() {
        assert!(square().contains(&[0.0, 0.0]).unwrap());
        assert!(!square().contains(&[2.0, 0.0]).unwrap());
        assert!(matches!(
            square().contains(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn box_center_inf_distance_is_one() {
        let d = square().lp_distance_to_boundary(&[0.0, 0.0], Norm::Inf).unwrap();
        assert_eq!(d, crate::body::Distance::Exact(1.0));
    }

    #[test]
    fn box_distance_exceeds() {
        let b = square();
        assert!(b.lp_distance_exceeds(&[0.0, 0.0], 0.5, Norm::L1).unwrap());
        assert!(!b.lp_distance_exceeds(&[0.9, 0.0], 0.5, Norm::L1).unwrap());
        assert!(b.lp_distance_exceeds(&[0.0, 0.0], -1.0, Norm::L1).is_err());
    }

    #[test]
    fn box_chord() {
        let (lo, hi) = square().chord_endpoints(&[0.5, 0.0], 0, 1e-12).unwrap();
        assert_eq!((lo, hi), (-1.5, 0.5));
    }

    #[test]
    fn ball_chord_pythagoras() {
        let ball = LpBall::new(vec![0.0, 0.0], 1.0, Norm::L2).unwrap();
        let (lo, hi) = ball.chord_endpoints(&[0.0, 0.6], 0, 1e-12).unwrap();
        assert!((lo + 0.8).abs() < 1e-15 && (hi - 0.8).abs() < 1e-15);
    }

    #[test]
    fn ball_volumes() {
        let disc = LpBall::new(vec![0.0, 0.0], 2.0, Norm::L2).unwrap();
        assert!((disc.volume().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let diamond = LpBall::new(vec![0.0; 3], 1.0, Norm::L1).unwrap();
        assert!((diamond.volume().unwrap() - 8.0 / 6.0).abs() < 1e-12);
        let cube = LpBall::new(vec![0.0; 3], 0.5, Norm::Inf).unwrap();
        assert_eq!(cube.volume().unwrap(), 1.0);
    }

    #[test]
    fn ball_inf_depth_matches_corner_bisection() {
        let ball = LpBall::new(vec![0.1, -0.2], 1.0, Norm::L2).unwrap();
        let x = [0.3, 0.25];
        let exact = ball.exact_depth(&x, Norm::Inf).unwrap();
        // Independent check: bisect the largest γ with all four corners inside.
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let g = 0.5 * (lo + hi);
            let ok = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
                .iter()
                .all(|(a, b)| ball.membership(&[x[0] + a * g, x[1] + b * g]));
            if ok {
                lo = g
            } else {
                hi = g
            }
        }
        assert!((exact - lo).abs() < 1e-12);
    }

    #[test]
    fn membership_only_l1_matches_exact() {
        let ball = LpBall::new(vec![0.0, 0.0, 0.0], 1.0, Norm::L2).unwrap();
        let x = [0.2, -0.1, 0.3];
        let exact = ball.lp_distance_to_boundary(&x, Norm::L1).unwrap();
        assert!(exact.is_exact());
        let approx = MembershipOnly(ball).lp_distance_to_boundary(&x, Norm::L1).unwrap();
        assert!(!approx.is_exact());
        assert!((approx.value() - exact.value()).abs() < 1e-12);
    }

    #[test]
    fn membership_only_rejects_other_norms() {
        let m = MembershipOnly(square());
        assert!(matches!(
            m.lp_distance_to_boundary(&[0.0, 0.0], Norm::L2),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            m.lp_distance_to_boundary(&[3.0, 0.0], Norm::L1),
            Err(Error::NotInterior)
        ));
    }

    #[test]
    fn membership_only_too_close_errors() {
        let m = MembershipOnly(square());
        let x = [1.0 - 1e-15, 0.0];
        assert!(matches!(
            m.lp_distance_to_boundary(&x, Norm::L1),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn membership_only_chord() {
        let m = MembershipOnly(LpBall::new(vec![0.0, 0.0], 1.0, Norm::L2).unwrap());
        let tol = 1e-10;
        let (lo, hi) = m.chord_endpoints(&[0.0, 0.6], 0, tol).unwrap();
        assert!((lo + 0.8).abs() <= tol && (hi - 0.8).abs() <= tol);
    }

    #[test]
    fn invalid_boxes_rejected() {
        assert!(AxisBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(AxisBox::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(LpBall::new(vec![0.0], -1.0, Norm::L2).is_err());
    }
}
