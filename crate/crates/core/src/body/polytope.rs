use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{ConvexBody, DEFAULT_PRECISION_BITS};
use crate::error::{Error, Result};
use crate::norm::Norm;

/// `K = {y : a_i · y ≤ b_i for all i}` with a certified interior point.
#[derive(Debug, Clone)]
pub struct HPolytope {
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    interior: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    // ‖a_i‖_1, ‖a_i‖_2, ‖a_i‖_∞: the dual norms for p = ∞, 2, 1.
    row_norms: [Vec<f64>; 3],
    volume: Option<f64>,
    precision_bits: u32,
}

impl HPolytope {
    pub fn new(normals: Vec<Vec<f64>>, offsets: Vec<f64>, interior: Vec<f64>) -> Result<Self> {
        let n = interior.len();
        if n == 0 {
            return Err(Error::invalid_body("interior_point", "dimension must be positive"));
        }
        if normals.is_empty() {
            return Err(Error::invalid_body("A", "at least one constraint is required"));
        }
        if normals.len() != offsets.len() {
            return Err(Error::invalid_body(
                "b",
                format!("{} offsets for {} constraint rows", offsets.len(), normals.len()),
            ));
        }
        for (i, row) in normals.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid_body(
                    "A",
                    format!("row {i} has length {}, expected {n}", row.len()),
                ));
            }
            if row.iter().any(|v| !v.is_finite()) || !offsets[i].is_finite() {
                return Err(Error::invalid_body("A", format!("row {i} is not finite")));
            }
            if row.iter().all(|v| *v == 0.0) {
                return Err(Error::invalid_body("A", format!("row {i} is the zero vector")));
            }
        }
        for (i, (row, b)) in normals.iter().zip(&offsets).enumerate() {
            if dot(row, &interior) >= *b {
                return Err(Error::invalid_body(
                    "interior_point",
                    format!("does not strictly satisfy constraint {i}"),
                ));
            }
        }
        let (lower, upper) = bounding_box(&normals, &offsets, n)?;
        let row_norms = [Norm::L1, Norm::L2, Norm::Inf].map(|q| normals.iter().map(|a| q.of(a)).collect());
        Ok(Self {
            normals,
            offsets,
            interior,
            lower,
            upper,
            row_norms,
            volume: None,
            precision_bits: DEFAULT_PRECISION_BITS,
        })
    }

    /// Records a known exact volume (needed by the finite chain).
    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self
    }

    pub fn with_precision_bits(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    /// The standard simplex `{y ≥ 0, Σ y_i ≤ 1}`.
    pub fn standard_simplex(n: usize) -> Result<Self> {
        let mut normals = vec![vec![1.0; n]];
        let mut offsets = vec![1.0];
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = -1.0;
            normals.push(row);
            offsets.push(0.0);
        }
        let interior = vec![1.0 / (n as f64 + 2.0); n];
        let volume = 1.0 / (1..=n).map(|k| k as f64).product::<f64>();
        Ok(Self::new(normals, offsets, interior)?.with_volume(volume))
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    fn dual_row_norm(&self, i: usize, p: Norm) -> f64 {
        match p {
            Norm::Inf => self.row_norms[0][i],
            Norm::P(v) if v == 2.0 => self.row_norms[1][i],
            Norm::P(v) if v == 1.0 => self.row_norms[2][i],
            _ => p.dual().of(&self.normals[i]),
        }
    }

    fn slacks<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.normals.iter().zip(&self.offsets).map(move |(a, b)| b - dot(a, x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn bounding_box(normals: &[Vec<f64>], offsets: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for axis in 0..n {
        for (dir, slot) in [(OptimizationDirection::Minimize, &mut lower), (OptimizationDirection::Maximize, &mut upper)] {
            let mut lp = Problem::new(dir);
            let vars: Vec<_> = (0..n)
                .map(|j| lp.add_var(if j == axis { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
                .collect();
            for (row, b) in normals.iter().zip(offsets) {
                let terms: Vec<_> = vars.iter().zip(row).map(|(v, c)| (*v, *c)).collect();
                lp.add_constraint(terms.as_slice(), ComparisonOp::Le, *b);
            }
            let sol = lp.solve().map_err(|e| match e {
                minilp::Error::Unbounded => Error::invalid_body("A", "polytope is unbounded"),
                minilp::Error::Infeasible => Error::invalid_body("A", "constraints are infeasible"),
            })?;
            // minilp can report a non-finite optimum instead of `Unbounded`
            // when every variable is free.
            let value = sol.objective();
            if !value.is_finite() {
                return Err(Error::invalid_body("A", "polytope is unbounded"));
            }
            slot[axis] = value;
        }
    }
    Ok((lower, upper))
}

impl ConvexBody for HPolytope {
    fn dim(&self) -> usize {
        self.interior.len()
    }

    fn membership(&self, x: &[f64]) -> bool {
        self.slacks(x).all(|s| s >= 0.0)
    }

    fn outer_radius(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.upper)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn reference_point(&self) -> Vec<f64> {
        self.interior.clone()
    }

    fn inner_radius(&self, p: Norm) -> f64 {
        self.exact_depth(&self.interior, p).unwrap_or(0.0)
    }

    fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    fn volume(&self) -> Option<f64> {
        self.volume
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lower.clone(), self.upper.clone())
    }

    /// Hölder: the `ℓ_p` distance from `x` to `{a·y > b}` is `(b - a·x)/‖a‖_q`.
    fn exact_depth(&self, x: &[f64], p: Norm) -> Option<f64> {
        Some(
            self.slacks(x)
                .enumerate()
                .fold(f64::INFINITY, |m, (i, s)| m.min(s / self.dual_row_norm(i, p))),
        )
    }

    fn exact_chord(&self, x: &[f64], axis: usize) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (a, s) in self.normals.iter().zip(self.slacks(x)) {
            if s <= 0.0 {
                return None;
            }
            let c = a[axis];
            if c > 0.0 {
                hi = hi.min(s / c);
            } else if c < 0.0 {
                lo = lo.max(s / c);
            }
        }
        Some((lo, hi))
    }

    fn exact_box_meets_interior(&self, lo: &[f64], hi: &[f64]) -> Option<bool> {
        // A single separating facet settles disjointness; otherwise undecided.
        for (a, b) in self.normals.iter().zip(&self.offsets) {
            let min: f64 = a
                .iter()
                .enumerate()
                .map(|(j, c)| if *c > 0.0 { c * lo[j] } else { c * hi[j] })
                .sum();
            if min >= *b {
                return Some(false);
            }
        }
        let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        if self.slacks(&c).all(|s| s > 0.0) {
            return Some(true);
        }
        None
    }
}
