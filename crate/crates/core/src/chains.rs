//! Step kernels: the lazy Metropolis walk `M_p` on Whitney cubes and
//! coordinate hit-and-run (CHR) on points, plus walk runners.

use rand::distr::Open01;
use rand::Rng;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::rng::{seeded, WalkRng};
use crate::whitney::{DyadicCube, WhitneyContext};

/// Retries of an `M_p` proposal after a retryable locate failure.
pub const MP_MAX_RETRIES: u32 = 16;

/// CHR chord tolerance relative to `R_∞`.
pub const CHR_RELATIVE_TOL: f64 = 1.0 / (1u64 << 40) as f64;

/// A facet of a cube: the axis it is orthogonal to and the outward sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Facet {
    pub axis: usize,
    pub sign: i8,
}

impl Facet {
    pub fn all(n: usize) -> impl Iterator<Item = Facet> {
        (0..n).flat_map(|axis| [-1, 1].map(|sign| Facet { axis, sign }))
    }
}

/// A point uniform on the open cube.
pub fn sample_point_in_cube<R: Rng + ?Sized>(q: &DyadicCube, rng: &mut R) -> Vec<f64> {
    let s = q.side();
    q.vertex()
        .iter()
        .map(|&v| {
            let u: f64 = rng.sample(Open01);
            (v as f64 + u) * s
        })
        .collect()
}

/// A point uniform on the boundary of `q`, with the facet it lies on.
pub fn sample_boundary_point<R: Rng + ?Sized>(q: &DyadicCube, rng: &mut R) -> (Vec<f64>, Facet) {
    let n = q.dim();
    let k = rng.random_range(0..2 * n);
    let facet = Facet {
        axis: k / 2,
        sign: if k % 2 == 0 { -1 } else { 1 },
    };
    let mut x = sample_point_in_cube(q, rng);
    let v = q.vertex()[facet.axis];
    x[facet.axis] = if facet.sign > 0 { (v + 1) as f64 } else { v as f64 } * q.side();
    (x, facet)
}

/// One step of `M_p` from `q ∈ F^(p)`.
///
/// Holds with probability `1/2`; otherwise proposes the cube containing a
/// point pushed `s(Q)/4` outward from a uniform boundary point and accepts
/// with probability `min(1, s(Q')/s(Q))`.
pub fn mp_step<B: ConvexBody, R: Rng + ?Sized>(
    ctx: &WhitneyContext<B>,
    q: &DyadicCube,
    rng: &mut R,
) -> Result<DyadicCube> {
    if rng.random::<bool>() {
        return Ok(q.clone());
    }
    let s = q.side();
    let mut last = None;
    for _ in 0..=MP_MAX_RETRIES {
        let (mut x, facet) = sample_boundary_point(q, rng);
        x[facet.axis] += f64::from(facet.sign) * s / 4.0;
        match ctx.locate_cube(&x) {
            Ok(next) => {
                let ratio = next.side() / s;
                if ratio >= 1.0 || rng.random::<f64>() < ratio {
                    return Ok(next);
                }
                return Ok(q.clone());
            }
            Err(e) if e.is_retryable() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(Error::StepFailure {
        attempts: MP_MAX_RETRIES + 1,
        reason: format!("proposal could not be located: {}", last.expect("at least one attempt")),
    })
}

/// One step of coordinate hit-and-run from `x ∈ K°`.
///
/// The new coordinate is uniform on the chord shrunk by `tol` at both ends.
pub fn chr_step<B: ConvexBody + ?Sized, R: Rng + ?Sized>(
    body: &B,
    x: &[f64],
    rng: &mut R,
    tol: f64,
) -> Result<Vec<f64>> {
    if rng.random::<bool>() {
        return Ok(x.to_vec());
    }
    let axis = rng.random_range(0..body.dim());
    let failure = |reason: String| Error::StepFailure { attempts: 1, reason };
    let (lo, hi) = body.chord_endpoints(x, axis, tol).map_err(|e| match e {
        Error::NotInterior => failure("current point is not interior".into()),
        other => other,
    })?;
    let (lo, hi) = (lo + tol, hi - tol);
    if !(lo < hi) {
        return Err(failure(format!("chord along axis {axis} is shorter than the tolerance")));
    }
    let u: f64 = rng.sample(Open01);
    let mut y = x.to_vec();
    y[axis] += lo + u * (hi - lo);
    Ok(y)
}

/// A Markov kernel with an explicit state type.
pub trait Kernel: Sync {
    type State: Clone + Send + Sync;

    fn step(&self, state: &Self::State, rng: &mut WalkRng) -> Result<Self::State>;
}

/// `M_p` as a [`Kernel`].
#[derive(Debug, Clone, Copy)]
pub struct MpKernel<'a, B> {
    pub ctx: &'a WhitneyContext<B>,
}

impl<B: ConvexBody> Kernel for MpKernel<'_, B> {
    type State = DyadicCube;

    fn step(&self, state: &DyadicCube, rng: &mut WalkRng) -> Result<DyadicCube> {
        mp_step(self.ctx, state, rng)
    }
}

/// CHR as a [`Kernel`].
#[derive(Debug, Clone, Copy)]
pub struct ChrKernel<'a, B: ?Sized> {
    pub body: &'a B,
    pub tol: f64,
}

impl<'a, B: ConvexBody + ?Sized> ChrKernel<'a, B> {
    /// Uses the default tolerance `2^{-40} R_∞`.
    pub fn new(body: &'a B) -> Self {
        Self {
            body,
            tol: CHR_RELATIVE_TOL * body.outer_radius(),
        }
    }
}

impl<B: ConvexBody + ?Sized> Kernel for ChrKernel<'_, B> {
    type State = Vec<f64>;

    fn step(&self, state: &Vec<f64>, rng: &mut WalkRng) -> Result<Vec<f64>> {
        chr_step(self.body, state, rng, self.tol)
    }
}

/// States recorded every `stride` steps, starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub states: Vec<S>,
    pub steps: u64,
    pub stride: u64,
    pub seed: Option<u64>,
}

/// Runs `steps` steps of `kernel` from a fixed seed.
pub fn run_walk<K: Kernel>(
    kernel: &K,
    start: K::State,
    steps: u64,
    stride: u64,
    seed: u64,
) -> Result<Trajectory<K::State>> {
    let mut rng = seeded(seed);
    let mut traj = run_walk_with(kernel, start, steps, stride, &mut rng)?;
    traj.seed = Some(seed);
    Ok(traj)
}

/// Runs `steps` steps of `kernel` drawing from `rng`.
pub fn run_walk_with<K: Kernel>(
    kernel: &K,
    start: K::State,
    steps: u64,
    stride: u64,
    rng: &mut WalkRng,
) -> Result<Trajectory<K::State>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let mut states = Vec::with_capacity((steps / stride) as usize + 1);
    let mut current = start;
    states.push(current.clone());
    for t in 1..=steps {
        current = kernel.step(&current, rng)?;
        if t % stride == 0 {
            states.push(current.clone());
        }
    }
    Ok(Trajectory {
        states,
        steps,
        stride,
        seed: None,
    })
}

/// One uniform point per recorded cube.
pub fn cube_trajectory_to_points<R: Rng + ?Sized>(traj: &Trajectory<DyadicCube>, rng: &mut R) -> Vec<Vec<f64>> {
    traj.states.iter().map(|q| sample_point_in_cube(q, rng)).collect()
}

/// `P(Q, Q')` for `Q' ≠ Q` sharing a facet piece of `(n-1)`-volume `area`:
/// `(1/2) · area / (2n s^{n-1}) · min(1, s'/s)`.
pub fn transition_probability(q: &DyadicCube, side_to: f64, area: f64) -> f64 {
    let n = q.dim();
    let s = q.side();
    let facet_area = s.powi(n as i32 - 1);
    0.5 * area / (2.0 * n as f64 * facet_area) * (side_to / s).min(1.0)
}

/// How a cube relates to an explicit (possibly truncated) decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeStatus {
    /// Member of `F^(p)` at or above the cutoff.
    Complete,
    /// Subdivided at the cutoff level; its descendants are not listed.
    Frontier,
    Absent,
}

/// Where a facet piece of a cube leads.
#[derive(Debug, Clone, PartialEq)]
pub enum ContactTarget {
    Cube(DyadicCube),
    /// Children of this frontier cube, which lie below the cutoff.
    Fused(DyadicCube),
}

/// A piece of a facet of `Q` shared with one neighbor (or fused region).
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub target: ContactTarget,
    pub area: f64,
    /// Side length of the cube(s) on the other side.
    pub side: f64,
}

/// Decomposes every facet of `q ∈ F^(p)` into the neighbors across it.
///
/// By the abutting-ratio property a facet meets either one cube of the same
/// side, one cube of twice the side, or `2^{n-1}` cubes of half the side.
pub fn facet_contacts<F>(q: &DyadicCube, status: F) -> Result<Vec<Contact>>
where
    F: Fn(&DyadicCube) -> Result<CubeStatus>,
{
    let n = q.dim();
    let s = q.side();
    let full = s.powi(n as i32 - 1);
    let mut out = Vec::with_capacity(2 * n);
    for facet in Facet::all(n) {
        let nb = q.neighbor(facet.axis, facet.sign);
        match status(&nb)? {
            CubeStatus::Complete => {
                out.push(Contact {
                    target: ContactTarget::Cube(nb),
                    area: full,
                    side: s,
                });
                continue;
            }
            CubeStatus::Frontier => {
                out.push(Contact {
                    target: ContactTarget::Fused(nb),
                    area: full,
                    side: s / 2.0,
                });
                continue;
            }
            CubeStatus::Absent => {}
        }
        if let Some(parent) = nb.parent() {
            if status(&parent)? == CubeStatus::Complete {
                out.push(Contact {
                    target: ContactTarget::Cube(parent),
                    area: full,
                    side: 2.0 * s,
                });
                continue;
            }
        }
        // Children of the neighbor on the face shared with q.
        let touching_bit = if facet.sign > 0 { 0 } else { 1 };
        for mask in 0..1u32 << n {
            if (mask >> facet.axis) & 1 != touching_bit {
                continue;
            }
            let child = nb.child(mask);
            if status(&child)? != CubeStatus::Complete {
                return Err(Error::DecompositionGap { level: q.level() });
            }
            out.push(Contact {
                target: ContactTarget::Cube(child),
                area: full / (1u64 << (n - 1)) as f64,
                side: s / 2.0,
            });
        }
    }
    Ok(out)
}

/// The off-diagonal row `P(Q, ·)` of `M_p`, decided cube by cube with the
/// decomposition predicate. Returns `(neighbor, probability)` pairs.
pub fn mp_transition_row<B: ConvexBody>(ctx: &WhitneyContext<B>, q: &DyadicCube) -> Result<Vec<(DyadicCube, f64)>> {
    let contacts = facet_contacts(q, |c| {
        Ok(if ctx.in_decomposition(c)? {
            CubeStatus::Complete
        } else {
            CubeStatus::Absent
        })
    })?;
    let mut row: Vec<(DyadicCube, f64)> = Vec::with_capacity(contacts.len());
    for c in contacts {
        let ContactTarget::Cube(target) = c.target else {
            unreachable!("no cutoff, so no fused contacts")
        };
        let p = transition_probability(q, c.side, c.area);
        match row.iter_mut().find(|(t, _)| *t == target) {
            Some(entry) => entry.1 += p,
            None => row.push((target, p)),
        }
    }
    Ok(row)
}
