//! Sample-based diagnostics: binned total variation, warmth, chi-square
//! uniformity and empirical mixing curves.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::body::ConvexBody;
use crate::chains::Kernel;
use crate::error::{Error, Result};
use crate::norm::Norm;
use crate::rng::{stream_rng, WalkRng};
use crate::whitney::DyadicCube;

/// Bootstrap resamples used for standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Membership probes per grid bin when estimating clipped bin volumes.
pub const BIN_VOLUME_PROBES: usize = 100_000;

/// Visit counts over the complete cubes of an enumeration, with one extra
/// bin for everything below the cutoff.
#[derive(Debug, Clone)]
pub struct WhitneyHistogram {
    cubes: Vec<DyadicCube>,
    index: HashMap<DyadicCube, usize>,
    pi: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl WhitneyHistogram {
    /// Bins are `cubes` plus a remainder; `π` of a cube is `vol(Q)/volume`.
    pub fn new(cubes: Vec<DyadicCube>, volume: f64) -> Result<Self> {
        let mut pi: Vec<f64> = cubes.iter().map(|q| q.volume() / volume).collect();
        let covered: f64 = pi.iter().sum();
        if covered > 1.0 + 1e-12 {
            return Err(Error::InconsistentVolume {
                volume,
                covered: covered * volume,
            });
        }
        pi.push((1.0 - covered).max(0.0));
        let index = cubes.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
        let counts = vec![0; pi.len()];
        Ok(Self {
            cubes,
            index,
            pi,
            counts,
            total: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    /// Reference probabilities, remainder last.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Bin of a cube of `F^(p)`; cubes below the cutoff go to the remainder.
    pub fn bin_of(&self, q: &DyadicCube) -> usize {
        self.index.get(q).copied().unwrap_or(self.cubes.len())
    }

    pub fn add(&mut self, q: &DyadicCube) {
        let b = self.bin_of(q);
        self.add_to_bin(b, 1);
    }

    pub fn add_to_bin(&mut self, bin: usize, count: u64) {
        self.counts[bin] += count;
        self.total += count;
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.total = 0;
    }

    /// Adds the counts of a histogram over the same bins.
    pub fn merge(&mut self, other: &WhitneyHistogram) -> Result<()> {
        if other.cubes != self.cubes {
            return Err(Error::InvalidArgument("histograms have different bins".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }
}

/// A TV estimate with its bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvEstimate {
    pub tv: f64,
    pub stderr: f64,
}

/// `(1/2) Σ_b |c_b/N - π_b|`.
pub fn binned_tv(counts: &[u64], pi: &[f64]) -> Result<f64> {
    if counts.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            got: counts.len(),
        });
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("histogram is empty".into()));
    }
    let n = total as f64;
    Ok(0.5 * counts.iter().zip(pi).map(|(&c, &p)| (c as f64 / n - p).abs()).sum::<f64>())
}

/// Multinomial draw by sequential binomials.
fn multinomial<R: Rng + ?Sized>(total: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = total;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() || left == 0 {
            out.push(left);
            left = 0;
            continue;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out.push(c);
        left -= c;
        mass -= p;
    }
    out
}

/// Binned TV with a bootstrap standard error from multinomial resamples.
pub fn tv_with_stderr<R: Rng + ?Sized>(counts: &[u64], pi: &[f64], rng: &mut R) -> Result<TvEstimate> {
    let tv = binned_tv(counts, pi)?;
    let total: u64 = counts.iter().sum();
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| binned_tv(&multinomial(total, &freq, rng), pi).expect("same bins"))
        .collect();
    let mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let var = boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64;
    Ok(TvEstimate {
        tv,
        stderr: var.sqrt(),
    })
}

/// TV between the histogram and its reference `π`, remainder bin included.
pub fn tv_estimate<R: Rng + ?Sized>(hist: &WhitneyHistogram, rng: &mut R) -> Result<TvEstimate> {
    tv_with_stderr(&hist.counts, &hist.pi, rng)
}

/// Largest ratio of empirical to reference mass over the bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarmthReport {
    pub m_hat: f64,
    pub bins: String,
}

pub fn warmth(counts: &[u64], pi: &[f64], bins: impl Into<String>) -> Result<WarmthReport> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("histogram is empty".into()));
    }
    let m_hat = counts
        .iter()
        .zip(pi)
        .filter(|(_, p)| **p > 0.0)
        .map(|(&c, &p)| c as f64 / total as f64 / p)
        .fold(0.0, f64::max);
    Ok(WarmthReport {
        m_hat,
        bins: bins.into(),
    })
}

/// A regular grid over an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBins {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub per_axis: usize,
}

impl GridBins {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, per_axis: usize) -> Result<Self> {
        if per_axis == 0 || lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidArgument("grid needs lower < upper and at least one bin".into()));
        }
        Ok(Self { lower, upper, per_axis })
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.lower.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major bin index, `None` outside the grid.
    pub fn bin_of(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for i in 0..self.lower.len() {
            let t = (x[i] - self.lower[i]) / (self.upper[i] - self.lower[i]);
            if !(0.0..=1.0).contains(&t) {
                return None;
            }
            let k = ((t * self.per_axis as f64) as usize).min(self.per_axis - 1);
            idx = idx * self.per_axis + k;
        }
        Some(idx)
    }

    /// Lower and upper corner of a bin.
    pub fn bin_box(&self, bin: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.lower.len();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        let mut rest = bin;
        for i in (0..n).rev() {
            let k = rest % self.per_axis;
            rest /= self.per_axis;
            let w = (self.upper[i] - self.lower[i]) / self.per_axis as f64;
            lo[i] = self.lower[i] + k as f64 * w;
            hi[i] = lo[i] + w;
        }
        (lo, hi)
    }
}

/// Result of a chi-square uniformity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    pub samples: usize,
    /// Largest relative standard error of the Monte-Carlo bin volumes.
    pub volume_rel_stderr: f64,
}

/// Grid bins over a body's bounding box with Monte-Carlo volumes of their
/// intersections with the body.
#[derive(Debug, Clone)]
pub struct UniformityGrid {
    grid: GridBins,
    fractions: Vec<f64>,
    volume_rel_stderr: f64,
}

impl UniformityGrid {
    pub fn new<B: ConvexBody + ?Sized>(body: &B, per_axis: usize, probes: usize, seed: u64) -> Result<Self> {
        let (lo, hi) = body.bounds();
        let grid = GridBins::new(lo, hi, per_axis)?;
        let hits: Vec<usize> = (0..grid.len())
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(seed, b as u64);
                let (lo, hi) = grid.bin_box(b);
                let mut x = vec![0.0; lo.len()];
                (0..probes)
                    .filter(|_| {
                        for i in 0..x.len() {
                            x[i] = rng.random_range(lo[i]..hi[i]);
                        }
                        body.membership(&x)
                    })
                    .count()
            })
            .collect();
        let total: usize = hits.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("no probe hit the body".into()));
        }
        let fractions: Vec<f64> = hits.iter().map(|&h| h as f64 / total as f64).collect();
        let volume_rel_stderr = hits
            .iter()
            .filter(|&&h| h > 0)
            .map(|&h| {
                let f = h as f64 / probes as f64;
                ((1.0 - f) / (f * probes as f64)).sqrt()
            })
            .fold(0.0, f64::max);
        Ok(Self {
            grid,
            fractions,
            volume_rel_stderr,
        })
    }

    pub fn grid(&self) -> &GridBins {
        &self.grid
    }

    /// Share of the body's volume in each bin.
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Pearson test of the points against the bin volumes, with
    /// `occupied bins - 1` degrees of freedom.
    pub fn test(&self, points: &[Vec<f64>]) -> Result<ChiSquareReport> {
        let mut counts = vec![0usize; self.grid.len()];
        for x in points {
            if let Some(b) = self.grid.bin_of(x) {
                counts[b] += 1;
            }
        }
        let n = points.len() as f64;
        let occupied: Vec<usize> = (0..counts.len()).filter(|&b| self.fractions[b] > 0.0).collect();
        if occupied.len() < 2 {
            return Err(Error::InvalidArgument("need at least two bins meeting the body".into()));
        }
        let min_expected = occupied.iter().map(|&b| n * self.fractions[b]).fold(f64::INFINITY, f64::min);
        if min_expected < 5.0 {
            return Err(Error::InvalidArgument(format!(
                "{} samples give an expected count of {min_expected:.2} in some bin; need at least 5",
                points.len()
            )));
        }
        let mut statistic = 0.0;
        for b in 0..counts.len() {
            let e = n * self.fractions[b];
            if e > 0.0 {
                statistic += (counts[b] as f64 - e).powi(2) / e;
            } else if counts[b] > 0 {
                statistic = f64::INFINITY;
            }
        }
        let dof = occupied.len() - 1;
        let p_value = if statistic.is_finite() {
            ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
        } else {
            0.0
        };
        Ok(ChiSquareReport {
            statistic,
            p_value,
            dof,
            samples: points.len(),
            volume_rel_stderr: self.volume_rel_stderr,
        })
    }
}

/// Chi-square uniformity of `points` in `body` on a `grid^n` grid, with bin
/// volumes estimated from [`BIN_VOLUME_PROBES`] probes per bin.
pub fn chi_square_uniformity<B: ConvexBody + ?Sized>(
    points: &[Vec<f64>],
    body: &B,
    grid: usize,
) -> Result<ChiSquareReport> {
    UniformityGrid::new(body, grid, BIN_VOLUME_PROBES, 0x5eed)?.test(points)
}

/// One point of a mixing curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingPoint {
    pub step: u64,
    pub tv: f64,
    pub stderr: f64,
}

/// Binned TV to `pi` after each checkpoint, over independent replicas.
///
/// Replica `r` draws its start from `init` and runs on stream `r` of `seed`;
/// the result does not depend on the thread count.
pub fn mixing_curve<K, I, F>(
    kernel: &K,
    init: I,
    bin: F,
    pi: &[f64],
    checkpoints: &[u64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<MixingPoint>>
where
    K: Kernel,
    I: Fn(&mut WalkRng) -> K::State + Sync,
    F: Fn(&K::State) -> usize + Sync,
{
    if replicas == 0 {
        return Err(Error::InvalidArgument("need at least one replica".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
    }
    let paths: Vec<Vec<usize>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<usize>> {
            let mut rng = stream_rng(seed, r as u64);
            let mut state = init(&mut rng);
            let mut t = 0;
            let mut out = Vec::with_capacity(checkpoints.len());
            for &c in checkpoints {
                while t < c {
                    state = kernel.step(&state, &mut rng)?;
                    t += 1;
                }
                out.push(bin(&state));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut boot_rng = stream_rng(seed, u64::MAX);
    checkpoints
        .iter()
        .enumerate()
        .map(|(k, &step)| {
            let mut counts = vec![0u64; pi.len()];
            for path in &paths {
                let b = path[k];
                if b >= pi.len() {
                    return Err(Error::InvalidArgument(format!("bin {b} out of range")));
                }
                counts[b] += 1;
            }
            let est = tv_with_stderr(&counts, pi, &mut boot_rng)?;
            Ok(MixingPoint {
                step,
                tv: est.tv,
                stderr: est.stderr,
            })
        })
        .collect()
}

/// Default `M_p` burn-in `C · n^{4+2/p} (R/r)^2 · ln(M/ε)`.
pub fn mp_burn_in(n: usize, p: Norm, aspect_ratio: f64, warmth: f64, eps: f64, c: f64) -> u64 {
    let exponent = 4.0 + 2.0 * p.reciprocal();
    let t = c * (n as f64).powf(exponent) * aspect_ratio.powi(2) * (warmth / eps).ln().max(1.0);
    t.ceil() as u64
}

/// Default CHR burn-in `C · n^9 (R/r)^2 · ln(M/ε)`.
pub fn chr_burn_in(n: usize, aspect_ratio: f64, warmth: f64, eps: f64, c: f64) -> u64 {
    let t = c * (n as f64).powi(9) * aspect_ratio.powi(2) * (warmth / eps).ln().max(1.0);
    t.ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{AxisBox, HPolytope};
    use crate::rng::seeded;
    use crate::whitney::WhitneyContext;

    fn square_hist() -> WhitneyHistogram {
        let ctx = WhitneyContext::new(AxisBox::centered_cube(2, 0.4).unwrap(), Norm::Inf);
        let en = ctx.enumerate_cubes(4).unwrap();
        WhitneyHistogram::new(en.complete, 0.64).unwrap()
    }

    #[test]
    fn tv_of_exact_proportions_is_zero() {
        let pi = [0.25, 0.5, 0.25];
        assert_eq!(binned_tv(&[1, 2, 1], &pi).unwrap(), 0.0);
        assert!(binned_tv(&[0, 0, 0], &pi).is_err());
    }

    #[test]
    fn tv_of_point_mass() {
        let mut h = square_hist();
        let q = h.cubes()[0].clone();
        for _ in 0..10 {
            h.add(&q);
        }
        let est = tv_estimate(&h, &mut seeded(1)).unwrap();
        assert!((est.tv - (1.0 - h.pi()[0])).abs() < 1e-15);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn stationary_draws_have_small_tv() {
        let h = square_hist();
        let mut rng = seeded(2);
        let counts = multinomial(1_000_000, h.pi(), &mut rng);
        assert!(binned_tv(&counts, h.pi()).unwrap() <= 0.01);
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = seeded(3);
        let c = multinomial(1000, &[0.2, 0.3, 0.5], &mut rng);
        assert_eq!(c.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn histogram_merge() {
        let mut a = square_hist();
        let mut b = square_hist();
        a.add_to_bin(0, 3);
        b.add_to_bin(1, 2);
        a.merge(&b).unwrap();
        assert_eq!(a.total(), 5);
        assert_eq!(a.counts()[..2], [3, 2]);
    }

    #[test]
    fn grid_indexing() {
        let g = GridBins::new(vec![0.0, 0.0], vec![1.0, 2.0], 4).unwrap();
        assert_eq!(g.bin_of(&[0.1, 0.1]), Some(0));
        assert_eq!(g.bin_of(&[0.9, 1.9]), Some(15));
        assert_eq!(g.bin_of(&[1.0, 2.0]), Some(15));
        assert_eq!(g.bin_of(&[1.5, 0.0]), None);
        assert_eq!(g.bin_box(6), (vec![0.25, 1.0], vec![0.5, 1.5]));
    }

    #[test]
    fn chi_square_rejects_single_bin() {
        let body = AxisBox::centered_cube(2, 1.0).unwrap();
        let pts = vec![vec![0.1, 0.1]; 1000];
        let r = chi_square_uniformity(&pts, &body, 4).unwrap();
        assert!(r.p_value < 1e-10);
        assert!(chi_square_uniformity(&pts[..20], &body, 4).is_err());
    }

    #[test]
    fn chi_square_accepts_uniform_simplex_points() {
        let body = HPolytope::standard_simplex(2).unwrap();
        let grid = UniformityGrid::new(&body, 4, 20_000, 4).unwrap();
        let mut rng = seeded(5);
        let mut pts = Vec::new();
        while pts.len() < 2000 {
            let x = vec![rng.random::<f64>(), rng.random::<f64>()];
            if body.membership(&x) {
                pts.push(x);
            }
        }
        assert!(grid.test(&pts).unwrap().p_value > 0.001);
    }

    #[test]
    fn burn_in_formulas() {
        assert_eq!(chr_burn_in(2, 1.0, std::f64::consts::E, 1.0, 1.0), 512);
        assert_eq!(mp_burn_in(2, Norm::Inf, 2.0, std::f64::consts::E, 1.0, 1.0), 64);
    }
}
