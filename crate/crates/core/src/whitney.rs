//! Dyadic cubes and the Whitney decomposition `F^(p)` of a convex body.
//!
//! Cubes live on the meshes `2^{a-k} (ℤ^n + [0,1]^n)`, where `a` is a global
//! scale exponent with `2^a > R_∞` and `k ≥ 0` is the level. A cube is
//! *subdivided* when half the `ℓ_p` distance from its center to `∂K` is less
//! than its `ℓ_p` diameter; `F^(p)` consists of the cubes whose ancestors are
//! all subdivided, which are not subdivided themselves, and whose center lies
//! in `K°`.

use std::cmp::Ordering;

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::body::{box_may_meet_interior, exterior_distance_upper, ConvexBody};
use crate::error::{Error, Result};
use crate::norm::Norm;

/// Integer lattice coordinates of a cube's lower corner.
pub type Vertex = SmallVec<[i64; 4]>;

/// Upper bound on the number of cubes held in memory by an enumeration.
pub const MAX_ENUMERATED_CUBES: usize = 40_000_000;

/// The cube `2^{scale-level} (vertex + [0,1]^n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    scale: i32,
    level: u32,
    vertex: Vertex,
}

impl Ord for DyadicCube {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.scale, self.level, &self.vertex[..]).cmp(&(other.scale, other.level, &other.vertex[..]))
    }
}

impl PartialOrd for DyadicCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn pow2(e: i32) -> f64 {
    2.0_f64.powi(e)
}

impl DyadicCube {
    pub fn new(scale: i32, level: u32, vertex: impl AsRef<[i64]>) -> Self {
        Self {
            scale,
            level,
            vertex: Vertex::from_slice(vertex.as_ref()),
        }
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertex(&self) -> &[i64] {
        &self.vertex
    }

    pub fn dim(&self) -> usize {
        self.vertex.len()
    }

    /// Exponent `e` with `side = 2^e`.
    pub fn side_exponent(&self) -> i32 {
        self.scale - self.level as i32
    }

    pub fn side(&self) -> f64 {
        pow2(self.side_exponent())
    }

    pub fn volume(&self) -> f64 {
        pow2(self.side_exponent() * self.dim() as i32)
    }

    /// `ℓ_p` diameter `n^{1/p} s`.
    pub fn diameter(&self, p: Norm) -> f64 {
        p.dim_factor(self.dim()) * self.side()
    }

    pub fn lower(&self) -> Vec<f64> {
        let s = self.side();
        self.vertex.iter().map(|&v| v as f64 * s).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        let s = self.side();
        self.vertex.iter().map(|&v| (v + 1) as f64 * s).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.vertex.iter().map(|&v| (v as f64 + 0.5) * s).collect()
    }

    /// Whether `x` lies in the open cube.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.vertex
            .iter()
            .zip(x)
            .all(|(&v, &xi)| (v as f64) * s < xi && xi < (v + 1) as f64 * s)
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            scale: self.scale,
            level: self.level - 1,
            vertex: self.vertex.iter().map(|v| v >> 1).collect(),
        })
    }

    /// Ancestor (or self) at `level ≤ self.level`.
    pub fn ancestor_at(&self, level: u32) -> DyadicCube {
        assert!(level <= self.level, "ancestor level {level} above cube level {}", self.level);
        let shift = self.level - level;
        DyadicCube {
            scale: self.scale,
            level,
            vertex: self.vertex.iter().map(|v| v >> shift).collect(),
        }
    }

    /// The `2^n` children, ordered by the bit pattern of their offsets.
    pub fn children(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        let n = self.dim();
        (0..1u32 << n).map(move |mask| self.child(mask))
    }

    /// Child whose offset along axis `i` is bit `i` of `mask`.
    pub fn child(&self, mask: u32) -> DyadicCube {
        DyadicCube {
            scale: self.scale,
            level: self.level + 1,
            vertex: self
                .vertex
                .iter()
                .enumerate()
                .map(|(i, v)| 2 * v + ((mask >> i) & 1) as i64)
                .collect(),
        }
    }

    /// Same-level cube across the facet on `axis` in direction `sign`.
    pub fn neighbor(&self, axis: usize, sign: i8) -> DyadicCube {
        let mut vertex = self.vertex.clone();
        vertex[axis] += sign as i64;
        DyadicCube {
            scale: self.scale,
            level: self.level,
            vertex,
        }
    }

    /// Whether `self` contains `other` (including equality).
    pub fn is_ancestor_of(&self, other: &DyadicCube) -> bool {
        self.scale == other.scale
            && self.level <= other.level
            && other.ancestor_at(self.level).vertex == self.vertex
    }

    /// Two dyadic cubes have disjoint interiors unless one contains the other.
    pub fn interiors_disjoint(&self, other: &DyadicCube) -> bool {
        !(self.is_ancestor_of(other) || other.is_ancestor_of(self))
    }

    /// Axis-wise overlaps on the common finer mesh, in units of its side.
    fn overlaps(&self, other: &DyadicCube) -> (u32, SmallVec<[i128; 4]>) {
        let fine = self.level.max(other.level);
        let lift = |c: &DyadicCube, i: usize| -> (i128, i128) {
            let shift = fine - c.level;
            let lo = (c.vertex[i] as i128) << shift;
            (lo, lo + (1i128 << shift))
        };
        let o = (0..self.dim())
            .map(|i| {
                let (a0, a1) = lift(self, i);
                let (b0, b1) = lift(other, i);
                a1.min(b1) - a0.max(b0)
            })
            .collect();
        (fine, o)
    }

    /// `(n-1)`-volume of the common facet when the cubes abut, `None` otherwise.
    pub fn shared_facet_area(&self, other: &DyadicCube) -> Option<f64> {
        if self.scale != other.scale || self.dim() != other.dim() {
            return None;
        }
        let (fine, o) = self.overlaps(other);
        if o.iter().any(|&v| v < 0) || o.iter().filter(|&&v| v == 0).count() != 1 {
            return None;
        }
        let cells: f64 = o.iter().filter(|&&v| v > 0).map(|&v| v as f64).product();
        let e = (self.scale - fine as i32) * (self.dim() as i32 - 1);
        Some(cells * pow2(e))
    }

    pub fn abuts(&self, other: &DyadicCube) -> bool {
        self.shared_facet_area(other).is_some()
    }
}

/// How the decomposition treats a single cube, ignoring its ancestors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeClass {
    /// Center in `K°` and not subdivided.
    Terminal,
    Subdivided,
    /// Center outside `K°` and the cube cannot meet `K°`.
    Outside,
}

/// Complete cubes of `F^(p)` up to a cutoff level, plus the subdivided cubes
/// left at the cutoff.
#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    pub complete: Vec<DyadicCube>,
    pub frontier: Vec<DyadicCube>,
}

impl Enumeration {
    pub fn complete_volume(&self) -> f64 {
        self.complete.iter().map(DyadicCube::volume).sum()
    }

    pub fn frontier_volume(&self) -> f64 {
        self.frontier.iter().map(DyadicCube::volume).sum()
    }
}

/// Orbit representatives with their orbit sizes.
#[derive(Debug, Clone, Default)]
pub struct OrbitEnumeration {
    pub complete: Vec<(DyadicCube, u64)>,
    pub frontier: Vec<(DyadicCube, u64)>,
}

/// Smallest `a ≥ 0` with `2^a > R_∞`.
pub fn scale_exponent_for(outer_radius: f64) -> i32 {
    let mut a = 0;
    while pow2(a) <= outer_radius {
        a += 1;
    }
    a
}

/// A body, a norm index and the scale exponent; `λ` is fixed at `1/2`.
#[derive(Debug, Clone)]
pub struct WhitneyContext<B> {
    body: B,
    p: Norm,
    scale: i32,
}

impl<B: ConvexBody> WhitneyContext<B> {
    pub const LAMBDA: f64 = 0.5;

    pub fn new(body: B, p: Norm) -> Self {
        let scale = scale_exponent_for(body.outer_radius());
        Self { body, p, scale }
    }

    pub fn body(&self) -> &B {
        &self.body
    }

    pub fn p(&self) -> Norm {
        self.p
    }

    pub fn scale_exponent(&self) -> i32 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn cube(&self, level: u32, vertex: impl AsRef<[i64]>) -> DyadicCube {
        DyadicCube::new(self.scale, level, vertex)
    }

    fn check_cube(&self, q: &DyadicCube) -> Result<()> {
        if q.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.dim(),
            });
        }
        if q.scale != self.scale {
            return Err(Error::InvalidArgument(format!(
                "cube has scale exponent {}, context uses {}",
                q.scale, self.scale
            )));
        }
        Ok(())
    }

    fn center_interior(&self, c: &[f64]) -> bool {
        match self.body.exact_depth(c, self.p) {
            Some(d) => d > 0.0,
            None => self.body.membership(c),
        }
    }

    /// Classifies a cube by the subdivision rule alone.
    ///
    /// For a center outside `K°` the distance rule is not meaningful; such a
    /// cube is treated as subdivided exactly when it may meet `K°`, which
    /// leaves `F^(p)` unchanged because only those cubes can have descendants
    /// with interior centers.
    pub fn classify(&self, q: &DyadicCube) -> Result<CubeClass> {
        self.check_cube(q)?;
        let c = q.center();
        if self.center_interior(&c) {
            let gamma = q.diameter(self.p) / Self::LAMBDA;
            if self.body.lp_distance_exceeds(&c, gamma, self.p)? {
                Ok(CubeClass::Terminal)
            } else {
                Ok(CubeClass::Subdivided)
            }
        } else if box_may_meet_interior(&self.body, &q.lower(), &q.upper()) {
            Ok(CubeClass::Subdivided)
        } else {
            Ok(CubeClass::Outside)
        }
    }

    pub fn is_subdivided(&self, q: &DyadicCube) -> Result<bool> {
        Ok(self.classify(q)? == CubeClass::Subdivided)
    }

    /// Level-0 cubes whose center is within `n^{1/p} s / 2` of `K`.
    pub fn in_root_mesh(&self, q: &DyadicCube) -> Result<bool> {
        self.check_cube(q)?;
        if q.level != 0 {
            return Err(Error::InvalidArgument("root mesh membership needs a level-0 cube".into()));
        }
        let threshold = 0.5 * q.diameter(self.p);
        let c = q.center();
        if exterior_distance_upper(&self.body, &c, self.p) <= threshold {
            return Ok(true);
        }
        // The bisection bound is only an upper bound; a cube that may meet K°
        // has its center within half a diameter of K.
        if self.body.exact_exterior_distance(&c, self.p).is_none() {
            return Ok(box_may_meet_interior(&self.body, &q.lower(), &q.upper()));
        }
        Ok(false)
    }

    pub fn in_decomposition(&self, q: &DyadicCube) -> Result<bool> {
        self.check_cube(q)?;
        if self.classify(q)? != CubeClass::Terminal {
            return Ok(false);
        }
        if q.level == 0 || !self.in_root_mesh(&q.ancestor_at(0))? {
            return Ok(false);
        }
        for level in 0..q.level {
            if !self.is_subdivided(&q.ancestor_at(level))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Inclusive range of levels that can hold a point at `ℓ_p` distance `d`
    /// from `∂K`, from the point sandwich `1.5 diam ≤ d ≤ 5 diam` widened by
    /// the `2^{±0.01}` oracle factor. The range holds at most two levels.
    pub fn candidate_levels(&self, d: f64) -> (u32, u32) {
        let base = self.p.dim_factor(self.dim()) * pow2(self.scale) / d;
        let lo = ((1.5 * base).log2() - 0.01).ceil().max(1.0);
        let hi = ((5.0 * base).log2() + 0.01).floor().max(0.0);
        (lo as u32, hi as u32)
    }

    /// The cube of `F^(p)` whose interior contains `x`.
    pub fn locate_cube(&self, x: &[f64]) -> Result<DyadicCube> {
        let d = self.body.lp_distance_to_boundary(x, self.p)?.value();
        let margin = self.body.margin();
        if d < margin {
            return Err(Error::TooCloseToBoundary { margin });
        }
        let (lo, hi) = self.candidate_levels(d);
        for level in (lo..=hi).rev() {
            let q = self.floor_cube(x, level)?;
            if self.classify(&q)? != CubeClass::Terminal {
                continue;
            }
            if let Some(parent) = q.parent() {
                if self.is_subdivided(&parent)? {
                    return Ok(q);
                }
            }
        }
        Err(Error::LocateFailed)
    }

    /// The level-`level` cube containing `x` in its interior.
    pub fn floor_cube(&self, x: &[f64], level: u32) -> Result<DyadicCube> {
        self.body.check_dim(x)?;
        let inv_side = pow2(level as i32 - self.scale);
        let mut vertex = Vertex::with_capacity(x.len());
        for &xi in x {
            let y = xi * inv_side;
            let f = y.floor();
            if f == y {
                return Err(Error::BoundaryPoint { level });
            }
            vertex.push(f as i64);
        }
        Ok(self.cube(level, vertex))
    }

    /// Level-0 cubes that may meet `K°`: since `K ⊂ (-2^a, 2^a)^n`, only the
    /// `2^n` cells with vertex in `{-1, 0}^n` qualify.
    pub fn roots(&self) -> Result<Vec<DyadicCube>> {
        let n = self.dim();
        let mut out = Vec::new();
        for mask in 0..1u32 << n {
            let vertex: Vertex = (0..n).map(|i| ((mask >> i) & 1) as i64 - 1).collect();
            let q = self.cube(0, vertex);
            if box_may_meet_interior(&self.body, &q.lower(), &q.upper()) && self.in_root_mesh(&q)? {
                out.push(q);
            }
        }
        Ok(out)
    }

    /// Breadth-first realization of the recursive construction down to
    /// level `depth`.
    pub fn enumerate_cubes(&self, depth: u32) -> Result<Enumeration> {
        if depth < 1 {
            return Err(Error::InvalidArgument("enumeration depth must be at least 1".into()));
        }
        let mut out = Enumeration::default();
        let mut current = self.roots()?;
        for level in 0..=depth {
            let classes: Vec<CubeClass> = current.par_iter().map(|q| self.classify(q)).collect::<Result<_>>()?;
            let mut next = Vec::new();
            for (q, class) in current.into_iter().zip(classes) {
                match class {
                    CubeClass::Terminal if level > 0 => out.complete.push(q),
                    CubeClass::Terminal | CubeClass::Outside => {}
                    CubeClass::Subdivided if level == depth => out.frontier.push(q),
                    CubeClass::Subdivided => next.extend(q.children()),
                }
            }
            if next.len() + out.complete.len() > MAX_ENUMERATED_CUBES {
                return Err(Error::TooLarge(format!(
                    "more than {MAX_ENUMERATED_CUBES} cubes at level {}",
                    level + 1
                )));
            }
            current = next;
        }
        out.complete.sort();
        out.frontier.sort();
        Ok(out)
    }

    /// Enumeration up to the symmetries that permute and reflect axes
    /// `1..n` (axis 0 is left alone).
    ///
    /// The body must be invariant under those symmetries; each returned cube
    /// is the representative with nonnegative, nondecreasing vertex entries on
    /// axes `1..n`, paired with the size of its orbit.
    pub fn enumerate_orbits(&self, depth: u32) -> Result<OrbitEnumeration> {
        if depth < 1 {
            return Err(Error::InvalidArgument("enumeration depth must be at least 1".into()));
        }
        let mut out = OrbitEnumeration::default();
        let mut current: Vec<DyadicCube> = self.roots()?.iter().map(canonical_orbit_rep).collect();
        current.sort();
        current.dedup();
        for level in 0..=depth {
            let classes: Vec<CubeClass> = current.par_iter().map(|q| self.classify(q)).collect::<Result<_>>()?;
            let mut next = Vec::new();
            for (q, class) in current.into_iter().zip(classes) {
                match class {
                    CubeClass::Terminal if level > 0 => {
                        let w = orbit_size(&q);
                        out.complete.push((q, w));
                    }
                    CubeClass::Terminal | CubeClass::Outside => {}
                    CubeClass::Subdivided if level == depth => {
                        let w = orbit_size(&q);
                        out.frontier.push((q, w));
                    }
                    CubeClass::Subdivided => {
                        next.extend(q.children().filter(is_orbit_rep));
                    }
                }
            }
            if next.len() + out.complete.len() > MAX_ENUMERATED_CUBES {
                return Err(Error::TooLarge(format!(
                    "more than {MAX_ENUMERATED_CUBES} orbit representatives at level {}",
                    level + 1
                )));
            }
            current = next;
        }
        out.complete.sort();
        out.frontier.sort();
        Ok(out)
    }
}

/// Representative of the orbit of `q` under permutations and reflections of
/// axes `1..n` (a reflection maps vertex entry `v` to `-v - 1`).
pub fn canonical_orbit_rep(q: &DyadicCube) -> DyadicCube {
    let mut vertex = q.vertex.clone();
    for v in vertex.iter_mut().skip(1) {
        if *v < 0 {
            *v = -*v - 1;
        }
    }
    vertex[1..].sort_unstable();
    DyadicCube {
        scale: q.scale,
        level: q.level,
        vertex,
    }
}

pub fn is_orbit_rep(q: &DyadicCube) -> bool {
    let tail = &q.vertex[1..];
    tail.iter().all(|&v| v >= 0) && tail.windows(2).all(|w| w[0] <= w[1])
}

/// Size of the orbit of a representative: `2^{n-1} (n-1)!` divided by the
/// factorials of the multiplicities among its entries on axes `1..n`.
pub fn orbit_size(q: &DyadicCube) -> u64 {
    let tail = &q.vertex[1..];
    let m = tail.len() as u64;
    let mut size: u64 = (1..=m).product::<u64>() << m;
    let mut i = 0;
    while i < tail.len() {
        let mut j = i;
        while j < tail.len() && tail[j] == tail[i] {
            j += 1;
        }
        size /= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    size
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{AxisBox, HPolytope, MembershipOnly};

    fn square_ctx() -> WhitneyContext<AxisBox> {
        WhitneyContext::new(AxisBox::centered_cube(2, 0.4).unwrap(), Norm::Inf)
    }

    #[test]
    fn cube_geometry_is_exact() {
        let q = DyadicCube::new(0, 3, [1, -2]);
        assert_eq!(q.side(), 0.125);
        assert_eq!(q.lower(), vec![0.125, -0.25]);
        assert_eq!(q.center(), vec![0.1875, -0.1875]);
        assert_eq!(q.volume(), 1.0 / 64.0);
        assert_eq!(q.diameter(Norm::L1), 0.25);
        assert_eq!(q.parent().unwrap(), DyadicCube::new(0, 2, [0, -1]));
        assert_eq!(q.ancestor_at(0), DyadicCube::new(0, 0, [0, -1]));
        assert_eq!(q.children().count(), 4);
        assert!(q.children().all(|c| q.is_ancestor_of(&c)));
    }

    #[test]
    fn facet_areas() {
        let q = DyadicCube::new(0, 2, [0, 0]);
        assert_eq!(q.shared_facet_area(&q.neighbor(0, 1)), Some(0.25));
        let small = DyadicCube::new(0, 3, [2, 1]);
        assert_eq!(q.shared_facet_area(&small), Some(0.125));
        assert_eq!(small.shared_facet_area(&q), Some(0.125));
        // Corner contact only.
        assert_eq!(q.shared_facet_area(&DyadicCube::new(0, 2, [1, 1])), None);
        // Nested cubes overlap.
        assert_eq!(q.shared_facet_area(&DyadicCube::new(0, 3, [0, 0])), None);
    }

    #[test]
    fn scale_exponent_rule() {
        assert_eq!(scale_exponent_for(0.4), 0);
        assert_eq!(scale_exponent_for(1.0), 1);
        assert_eq!(scale_exponent_for(1.5), 1);
        assert_eq!(scale_exponent_for(2.0), 2);
    }

    #[test]
    fn subdivision_examples() {
        let ctx = square_ctx();
        assert!(ctx.is_subdivided(&ctx.cube(0, [0, 0])).unwrap());
        assert!(ctx.is_subdivided(&ctx.cube(2, [0, 0])).unwrap());
        assert!(!ctx.is_subdivided(&ctx.cube(3, [0, 0])).unwrap());
    }

    #[test]
    fn root_mesh_examples() {
        let ctx = square_ctx();
        assert!(ctx.in_root_mesh(&ctx.cube(0, [0, 0])).unwrap());
        assert!(!ctx.in_root_mesh(&ctx.cube(0, [2, 0])).unwrap());
        assert!(ctx.in_root_mesh(&ctx.cube(0, [-1, -1])).unwrap());
    }

    #[test]
    fn decomposition_examples() {
        let ctx = square_ctx();
        assert!(ctx.in_decomposition(&ctx.cube(3, [0, 0])).unwrap());
        assert!(!ctx.in_decomposition(&ctx.cube(2, [0, 0])).unwrap());
        // Its center (0.4375, 0.0625) lies outside the square.
        assert!(!ctx.in_decomposition(&ctx.cube(3, [3, 0])).unwrap());
    }

    #[test]
    fn locate_examples() {
        let ctx = square_ctx();
        assert_eq!(ctx.locate_cube(&[0.01, 0.01]).unwrap(), ctx.cube(3, [0, 0]));
        assert_eq!(ctx.locate_cube(&[0.01, -0.01]).unwrap(), ctx.cube(3, [0, -1]));
        let q = ctx.locate_cube(&[0.2, 0.2]).unwrap();
        let en = ctx.enumerate_cubes(8).unwrap();
        let hits: Vec<_> = en.complete.iter().filter(|c| c.contains_point(&[0.2, 0.2])).collect();
        assert_eq!(hits, vec![&q]);
    }

    #[test]
    fn locate_rejects_dyadic_points_and_outside() {
        let ctx = square_ctx();
        assert!(matches!(ctx.locate_cube(&[0.0, 0.01]), Err(Error::BoundaryPoint { .. })));
        assert!(matches!(ctx.locate_cube(&[0.5, 0.0]), Err(Error::NotInterior)));
        assert!(matches!(
            ctx.locate_cube(&[0.4 - 1e-15, 0.01]),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn enumeration_examples() {
        let ctx = square_ctx();
        let en = ctx.enumerate_cubes(4).unwrap();
        let level3: Vec<_> = en.complete.iter().filter(|q| q.level() == 3).cloned().collect();
        assert_eq!(
            level3,
            vec![ctx.cube(3, [-1, -1]), ctx.cube(3, [-1, 0]), ctx.cube(3, [0, -1]), ctx.cube(3, [0, 0])]
        );
        let shallow = ctx.enumerate_cubes(1).unwrap();
        assert!(shallow.complete.is_empty());
        assert!(!shallow.frontier.is_empty());
    }

    #[test]
    fn enumeration_volume_telescopes() {
        let ctx = WhitneyContext::new(AxisBox::centered_cube(1, 0.4).unwrap(), Norm::Inf);
        let en = ctx.enumerate_cubes(30).unwrap();
        assert!(en.frontier_volume() < 1e-6 * 0.8);
        let v = en.complete_volume();
        assert!(v <= 0.8 && v >= 0.8 * (1.0 - 1e-6), "covered {v}");

        let ctx = square_ctx();
        let en = ctx.enumerate_cubes(7).unwrap();
        let clipped: f64 = en
            .frontier
            .iter()
            .map(|q| ctx.body().intersection_volume(&q.lower(), &q.upper()))
            .sum();
        assert!((en.complete_volume() + clipped - 0.64).abs() < 1e-12);
    }

    #[test]
    fn membership_only_body_gives_same_decomposition() {
        // Offsets avoid exact ties between dyadic centers and the facets.
        let tilted = HPolytope::new(
            vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
            vec![0.9871, 0.0123, 0.0231],
            vec![0.2, 0.2],
        )
        .unwrap();
        let exact = WhitneyContext::new(tilted.clone(), Norm::L1);
        let generic = WhitneyContext::new(MembershipOnly(tilted), Norm::L1);
        let a = exact.enumerate_cubes(6).unwrap();
        let b = generic.enumerate_cubes(6).unwrap();
        assert_eq!(a.complete, b.complete);
        // The generic box test is conservative, so it may keep extra cubes whose
        // centers lie outside the body.
        assert!(a.frontier.iter().all(|q| b.frontier.binary_search(q).is_ok()));
    }

    #[test]
    fn orbit_weights() {
        assert_eq!(orbit_size(&DyadicCube::new(0, 3, [0, 1, 2])), 8);
        assert_eq!(orbit_size(&DyadicCube::new(0, 3, [0, 1, 1])), 4);
        assert_eq!(orbit_size(&DyadicCube::new(0, 3, [5, 0, 0, 0])), 8);
        let q = DyadicCube::new(0, 3, [-1, -2, 0]);
        assert_eq!(canonical_orbit_rep(&q), DyadicCube::new(0, 3, [-1, 0, 1]));
    }

    #[test]
    fn orbits_reproduce_full_enumeration() {
        let ctx = WhitneyContext::new(AxisBox::centered_cube(3, 0.5).unwrap(), Norm::L2);
        let full = ctx.enumerate_cubes(5).unwrap();
        let orbits = ctx.enumerate_orbits(5).unwrap();
        let total: u64 = orbits.complete.iter().map(|(_, w)| w).sum();
        assert_eq!(total as usize, full.complete.len());
        let total: u64 = orbits.frontier.iter().map(|(_, w)| w).sum();
        assert_eq!(total as usize, full.frontier.len());
        let mut reps: Vec<_> = full.complete.iter().map(canonical_orbit_rep).collect();
        reps.sort();
        reps.dedup();
        let listed: Vec<_> = orbits.complete.iter().map(|(q, _)| q.clone()).collect();
        assert_eq!(reps, listed);
    }
}
