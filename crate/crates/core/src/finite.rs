//! The finite chain `M_{p,a}`: `M_p` with every cube below level `a` fused
//! into a single state `Q_∞`, as an explicit sparse matrix.
//!
//! Also exact ergodic flows, conductances, brute-force conductance profiles
//! and the half-cube experiment on `[-1/2, 1/2]^n`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::body::{AxisBox, ConvexBody};
use crate::chains::{facet_contacts, transition_probability, ContactTarget, CubeStatus};
use crate::error::{Error, Result};
use crate::norm::Norm;
use crate::whitney::{canonical_orbit_rep, DyadicCube, WhitneyContext};

/// Largest chain accepted by [`conductance_profile_bruteforce`].
pub const MAX_PROFILE_STATES: usize = 22;

/// A state of `M_{p,a}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChainState {
    Cube(DyadicCube),
    /// Fused cubes of one partition class.
    Fused(usize),
}

/// How the fused region is split into states. Each class must be a union of
/// frontier cubes, and `class_volume` the volume of `K` inside that union
/// together with the complete cubes assigned to the class.
pub trait FusedPartition: Sync {
    fn classes(&self) -> usize;
    fn class_of(&self, cube: &DyadicCube) -> usize;
    fn class_volume(&self, class: usize) -> f64;
}

/// A single `Q_∞`.
#[derive(Debug, Clone, Copy)]
pub struct SingleFused {
    pub volume: f64,
}

impl FusedPartition for SingleFused {
    fn classes(&self) -> usize {
        1
    }

    fn class_of(&self, _cube: &DyadicCube) -> usize {
        0
    }

    fn class_volume(&self, _class: usize) -> f64 {
        self.volume
    }
}

/// Splits `Q_∞` by the side of the hyperplane `x_axis = 0` that each cube's
/// center lies on; class 0 is the negative side. `half_volumes` are the
/// volumes of `K` on each side.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpaceSplit {
    pub axis: usize,
    pub half_volumes: [f64; 2],
}

impl FusedPartition for HalfSpaceSplit {
    fn classes(&self) -> usize {
        2
    }

    fn class_of(&self, cube: &DyadicCube) -> usize {
        usize::from(cube.vertex()[self.axis] >= 0)
    }

    fn class_volume(&self, class: usize) -> f64 {
        self.half_volumes[class]
    }
}

/// An explicit reversible chain: states, stationary law and sparse rows
/// (each sorted by column, diagonal included).
#[derive(Debug, Clone)]
pub struct FiniteChain {
    states: Vec<ChainState>,
    pi: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Ergodic flow and conductance of a subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutReport {
    pub pi_s: f64,
    /// `Ψ(S) = Σ_{i∈S, j∉S} π_i P_ij`.
    pub psi: f64,
    /// `Ψ` of the complement; equal to `psi` for a stationary `π`.
    pub psi_complement: f64,
    pub phi: f64,
}

impl FiniteChain {
    /// Builds a chain from a dense matrix, dropping zero entries.
    pub fn from_dense(states: Vec<ChainState>, pi: Vec<f64>, matrix: &[Vec<f64>]) -> Result<Self> {
        let m = pi.len();
        if states.len() != m || matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("states, pi and matrix sizes disagree".into()));
        }
        let rows = matrix
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect())
            .collect();
        Ok(Self { states, pi, rows })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn states(&self) -> &[ChainState] {
        &self.states
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |e| e.0).map_or(0.0, |k| row[k].1)
    }

    pub fn index_of(&self, state: &ChainState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let m = self.len();
        let mut out = vec![vec![0.0; m]; m];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[i][j] = v;
            }
        }
        out
    }

    /// `max_i |Σ_j P_ij - 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `‖πP - π‖_∞`.
    pub fn stationarity_error(&self) -> f64 {
        let next = self.step_distribution(&self.pi);
        next.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max_{i,j} |π_i P_ij - π_j P_ji|`.
    pub fn detailed_balance_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((self.pi[i] * v - self.pi[j] * self.entry(j, i)).abs());
            }
        }
        worst
    }

    /// `νP`.
    pub fn step_distribution(&self, nu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            if nu[i] == 0.0 {
                continue;
            }
            for &(j, v) in row {
                out[j] += nu[i] * v;
            }
        }
        out
    }

    /// Point mass on state `i`.
    pub fn point_mass(&self, i: usize) -> Vec<f64> {
        let mut nu = vec![0.0; self.len()];
        nu[i] = 1.0;
        nu
    }

    pub fn tv_to_stationary(&self, nu: &[f64]) -> f64 {
        0.5 * nu.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `‖ν/π - 1‖²_{L²(π)}`.
    pub fn l2_distance_sq(&self, nu: &[f64]) -> f64 {
        nu.iter().zip(&self.pi).map(|(a, p)| (a - p).powi(2) / p).sum()
    }

    /// Exact laws `ν, νP, ..., νP^steps`.
    pub fn evolve(&self, nu: &[f64], steps: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(nu.to_vec());
        for t in 0..steps {
            let next = self.step_distribution(&out[t]);
            out.push(next);
        }
        out
    }
}

/// `M_{p,a}` with a single fused state.
pub fn build_aux_chain<B: ConvexBody>(ctx: &WhitneyContext<B>, depth: u32, volume: f64) -> Result<FiniteChain> {
    build_aux_chain_partitioned(ctx, depth, &SingleFused { volume })
}

/// `M_{p,a}` with the fused region split by `partition`.
///
/// Rows of complete cubes are `M_p`'s transition law with targets below the
/// cutoff lumped by class; fused rows follow from detailed balance, with no
/// mass between different fused classes and the remainder on the diagonal.
pub fn build_aux_chain_partitioned<B: ConvexBody, P: FusedPartition>(
    ctx: &WhitneyContext<B>,
    depth: u32,
    partition: &P,
) -> Result<FiniteChain> {
    let en = ctx.enumerate_cubes(depth)?;
    let m = en.complete.len();
    let index: HashMap<&DyadicCube, usize> = en.complete.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let frontier: HashSet<&DyadicCube> = en.frontier.iter().collect();

    // Fused classes that actually hold frontier cubes, and their masses.
    let classes = partition.classes();
    let mut class_state = vec![None; classes];
    let mut fused_states = Vec::new();
    for q in &en.frontier {
        let c = partition.class_of(q);
        if class_state[c].is_none() {
            class_state[c] = Some(m + fused_states.len());
            fused_states.push(c);
        }
    }
    let total_volume: f64 = (0..classes).map(|c| partition.class_volume(c)).sum();
    let mut pi: Vec<f64> = en.complete.iter().map(|q| q.volume() / total_volume).collect();
    let mut covered = vec![0.0; classes];
    for q in &en.complete {
        covered[partition.class_of(q)] += q.volume();
    }
    for &c in &fused_states {
        let mass = partition.class_volume(c) - covered[c];
        if !(mass > 0.0) {
            return Err(Error::InconsistentVolume {
                volume: partition.class_volume(c),
                covered: covered[c],
            });
        }
        pi.push(mass / total_volume);
    }
    for c in 0..classes {
        if class_state[c].is_none() && covered[c] > partition.class_volume(c) {
            return Err(Error::InconsistentVolume {
                volume: partition.class_volume(c),
                covered: covered[c],
            });
        }
    }

    let status = |c: &DyadicCube| -> Result<CubeStatus> {
        Ok(if index.contains_key(c) {
            CubeStatus::Complete
        } else if frontier.contains(c) {
            CubeStatus::Frontier
        } else {
            CubeStatus::Absent
        })
    };
    let mut rows: Vec<Vec<(usize, f64)>> = en
        .complete
        .par_iter()
        .enumerate()
        .map(|(i, q)| -> Result<Vec<(usize, f64)>> {
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for c in facet_contacts(q, status)? {
                let j = match &c.target {
                    ContactTarget::Cube(t) => index[t],
                    ContactTarget::Fused(f) => class_state[partition.class_of(f)].expect("class has frontier cubes"),
                };
                *acc.entry(j).or_insert(0.0) += transition_probability(q, c.side, c.area);
            }
            let off: f64 = acc.values().sum();
            acc.insert(i, 1.0 - off);
            let mut row: Vec<_> = acc.into_iter().collect();
            row.sort_by_key(|e| e.0);
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut fused_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fused_states.len()];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            if j >= m {
                fused_rows[j - m].push((i, pi[i] * v / pi[j]));
            }
        }
    }
    for (k, row) in fused_rows.iter_mut().enumerate() {
        let off: f64 = row.iter().map(|e| e.1).sum();
        let holding = 1.0 - off;
        if holding < -1e-12 {
            return Err(Error::InconsistentVolume {
                volume: partition.class_volume(fused_states[k]),
                covered: covered[fused_states[k]],
            });
        }
        row.push((m + k, holding.max(0.0)));
    }
    rows.extend(fused_rows);

    let mut states: Vec<ChainState> = en.complete.into_iter().map(ChainState::Cube).collect();
    states.extend(fused_states.into_iter().map(ChainState::Fused));
    Ok(FiniteChain { states, pi, rows })
}

/// Exact `Ψ(S)`, `π(S)` and `Φ(S)` for the subset given by `in_s`.
pub fn cut_conductance(chain: &FiniteChain, in_s: &[bool]) -> Result<CutReport> {
    if in_s.len() != chain.len() {
        return Err(Error::DimensionMismatch {
            expected: chain.len(),
            got: in_s.len(),
        });
    }
    let count = in_s.iter().filter(|b| **b).count();
    if count == 0 || count == chain.len() {
        return Err(Error::InvalidArgument("subset must be nonempty and proper".into()));
    }
    let (mut psi, mut psi_c, mut pi_s) = (0.0, 0.0, 0.0);
    for (i, row) in chain.rows.iter().enumerate() {
        if in_s[i] {
            pi_s += chain.pi[i];
        }
        for &(j, v) in row {
            if in_s[i] && !in_s[j] {
                psi += chain.pi[i] * v;
            } else if !in_s[i] && in_s[j] {
                psi_c += chain.pi[i] * v;
            }
        }
    }
    Ok(CutReport {
        pi_s,
        psi,
        psi_complement: psi_c,
        phi: psi / pi_s,
    })
}

/// `min { Φ(S) : S ≠ ∅, π(S) ≤ alpha }` by exhaustive search.
pub fn conductance_profile_bruteforce(chain: &FiniteChain, alpha: f64) -> Result<f64> {
    let m = chain.len();
    if m > MAX_PROFILE_STATES {
        return Err(Error::TooLarge(format!(
            "{m} states; exhaustive profiles are limited to {MAX_PROFILE_STATES}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    // flow[i][j] = π_i P_ij off the diagonal.
    let mut flow = vec![vec![0.0; m]; m];
    for (i, row) in chain.rows.iter().enumerate() {
        for &(j, v) in row {
            if i != j {
                flow[i][j] = chain.pi[i] * v;
            }
        }
    }
    let mut in_s = vec![false; m];
    let (mut psi, mut pi_s) = (0.0_f64, 0.0_f64);
    let mut best = f64::INFINITY;
    // Gray code: step g flips bit trailing_zeros(g).
    for g in 1u64..1 << m {
        let k = g.trailing_zeros() as usize;
        let (mut to_out, mut from_in) = (0.0, 0.0);
        for j in 0..m {
            if j == k {
                continue;
            }
            if in_s[j] {
                from_in += flow[j][k];
            } else {
                to_out += flow[k][j];
            }
        }
        if in_s[k] {
            psi += from_in - to_out;
            pi_s -= chain.pi[k];
        } else {
            psi += to_out - from_in;
            pi_s += chain.pi[k];
        }
        in_s[k] = !in_s[k];
        if pi_s <= alpha * (1.0 + 1e-12) && pi_s > 0.0 {
            best = best.min(psi.max(0.0) / pi_s);
        }
    }
    if best.is_infinite() {
        return Err(Error::InvalidArgument(format!("no subset has stationary mass at most {alpha}")));
    }
    Ok(best)
}

/// Outcome of the half-cube experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfCubeReport {
    pub n: usize,
    pub p: String,
    pub depth: u32,
    pub cut: CutReport,
    /// Stationary mass of the complete cubes touching the cutting hyperplane.
    pub pi_boundary: f64,
    pub orbit_count: usize,
    pub cube_count: u64,
}

/// Cuts `K = [-1/2, 1/2]^n` by `x_0 = 0` and measures the flow across it in
/// `M_{p,a}` with `Q_∞` split by side.
///
/// `S` holds the complete cubes with center `x_0 < 0` and the negative fused
/// state. Cubes are enumerated up to the symmetries of the other axes, so
/// dimensions up to 5 at depth 7 stay cheap. `π(S)` is summed from the cubes
/// themselves (complete cubes plus frontier cubes clipped to `K`).
pub fn half_cube_experiment(n: usize, p: Norm, depth: u32) -> Result<HalfCubeReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("the half-cube experiment needs n ≥ 2".into()));
    }
    let body = AxisBox::centered_cube(n, 0.5)?;
    let ctx = WhitneyContext::new(body, p);
    let orbits = ctx.enumerate_orbits(depth)?;
    let complete: HashSet<&DyadicCube> = orbits.complete.iter().map(|(q, _)| q).collect();
    let frontier: HashSet<&DyadicCube> = orbits.frontier.iter().map(|(q, _)| q).collect();
    let status = |c: &DyadicCube| -> Result<CubeStatus> {
        let rep = canonical_orbit_rep(c);
        Ok(if complete.contains(&rep) {
            CubeStatus::Complete
        } else if frontier.contains(&rep) {
            CubeStatus::Frontier
        } else {
            CubeStatus::Absent
        })
    };
    let left = |q: &DyadicCube| q.vertex()[0] < 0;

    // Crossing flows out of complete cubes, split by whether the target is a
    // complete cube or fused. By detailed balance a flow from a complete cube
    // into the fused state across the cut equals the flow back out of it, so
    // it counts towards both Ψ(S) and Ψ(S^c).
    let (psi, psi_c, pi_left, pi_boundary) = orbits
        .complete
        .par_iter()
        .map(|(q, w)| -> Result<(f64, f64, f64, f64)> {
            let w = *w as f64;
            let pi_q = q.volume();
            let (mut to_cube, mut to_fused) = (0.0, 0.0);
            for c in facet_contacts(q, status)? {
                let (t, fused) = match &c.target {
                    ContactTarget::Cube(t) => (t, false),
                    ContactTarget::Fused(t) => (t, true),
                };
                if left(t) != left(q) {
                    let flow = pi_q * transition_probability(q, c.side, c.area);
                    if fused {
                        to_fused += flow;
                    } else {
                        to_cube += flow;
                    }
                }
            }
            let touches = q.vertex()[0] == -1 || q.vertex()[0] == 0;
            let boundary = if touches { w * pi_q } else { 0.0 };
            Ok(if left(q) {
                (w * (to_cube + to_fused), w * to_fused, w * pi_q, boundary)
            } else {
                (w * to_fused, w * (to_cube + to_fused), 0.0, boundary)
            })
        })
        .try_reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3)))?;

    let frontier_left: f64 = orbits
        .frontier
        .iter()
        .filter(|(q, _)| left(q))
        .map(|(q, w)| *w as f64 * ctx.body().intersection_volume(&q.lower(), &q.upper()))
        .sum();
    let pi_s = pi_left + frontier_left;
    let cube_count = orbits.complete.iter().map(|(_, w)| w).sum();
    Ok(HalfCubeReport {
        n,
        p: p.to_string(),
        depth,
        cut: CutReport {
            pi_s,
            psi,
            psi_complement: psi_c,
            phi: psi / pi_s,
        },
        pi_boundary,
        orbit_count: orbits.complete.len(),
        cube_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_ctx() -> WhitneyContext<AxisBox> {
        WhitneyContext::new(AxisBox::centered_cube(2, 0.4).unwrap(), Norm::Inf)
    }

    fn two_state(q: f64) -> FiniteChain {
        FiniteChain::from_dense(
            vec![ChainState::Fused(0), ChainState::Fused(1)],
            vec![0.5, 0.5],
            &[vec![1.0 - q, q], vec![q, 1.0 - q]],
        )
        .unwrap()
    }

    #[test]
    fn two_state_profile() {
        let chain = two_state(0.3);
        assert!((conductance_profile_bruteforce(&chain, 0.5).unwrap() - 0.3).abs() < 1e-15);
        assert!(conductance_profile_bruteforce(&chain, 0.4).is_err());
    }

    #[test]
    fn square_chain_structure() {
        let chain = build_aux_chain(&square_ctx(), 5, 0.64).unwrap();
        for (state, pi) in chain.states().iter().zip(chain.pi()) {
            if let ChainState::Cube(q) = state {
                assert_eq!(*pi, q.side() * q.side() / 0.64);
            }
        }
        assert!(chain.row_sum_error() < 1e-12);
        assert!(chain.stationarity_error() < 1e-10);
        assert!(chain.detailed_balance_error() < 1e-12);
        for i in 0..chain.len() {
            if matches!(chain.states()[i], ChainState::Cube(_)) {
                assert!(chain.entry(i, i) >= 0.5);
            }
        }
    }

    #[test]
    fn inconsistent_volume_is_rejected() {
        let err = build_aux_chain(&square_ctx(), 4, 0.01).unwrap_err();
        assert!(matches!(err, Error::InconsistentVolume { .. }));
    }

    #[test]
    fn cut_examples() {
        let chain = build_aux_chain(&square_ctx(), 4, 0.64).unwrap();
        let mut s = vec![false; chain.len()];
        s[3] = true;
        let single = cut_conductance(&chain, &s).unwrap();
        assert!((single.phi - (1.0 - chain.entry(3, 3))).abs() < 1e-14);
        assert!((single.psi - single.psi_complement).abs() < 1e-14);
        let complement: Vec<bool> = s.iter().map(|b| !b).collect();
        let other = cut_conductance(&chain, &complement).unwrap();
        assert!((other.psi - single.psi).abs() < 1e-14);
        assert!(cut_conductance(&chain, &vec![false; chain.len()]).is_err());
        assert!(cut_conductance(&chain, &vec![true; chain.len()]).is_err());
    }

    #[test]
    fn coarse_square_profile() {
        let chain = build_aux_chain(&square_ctx(), 3, 0.64).unwrap();
        assert_eq!(chain.len(), 5);
        // Each level-3 cube leaves with probability 3/8: 1/8 to each of two
        // level-3 neighbors and 1/16 to the fused state across each outer facet.
        for i in 0..4 {
            assert_eq!(chain.entry(i, i), 5.0 / 8.0);
        }
        let all_four = [true, true, true, true, false];
        let left_pair = [true, true, false, false, false];
        assert_eq!(cut_conductance(&chain, &all_four).unwrap().phi, 1.0 / 8.0);
        assert_eq!(cut_conductance(&chain, &left_pair).unwrap().phi, 1.0 / 4.0);
        let profile = conductance_profile_bruteforce(&chain, 0.5).unwrap();
        assert!((profile - 1.0 / 8.0).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for alpha in [0.025, 0.03, 0.05, 0.1, 0.3, 0.5] {
            let v = conductance_profile_bruteforce(&chain, alpha).unwrap();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn power_iteration_converges() {
        let chain = build_aux_chain(&square_ctx(), 4, 0.64).unwrap();
        let mut nu = chain.point_mass(0);
        for _ in 0..20_000 {
            nu = chain.step_distribution(&nu);
        }
        assert!(chain.tv_to_stationary(&nu) < 1e-9);
    }

    #[test]
    fn half_cube_mass_is_exactly_half() {
        let r = half_cube_experiment(2, Norm::Inf, 6).unwrap();
        assert_eq!(r.cut.pi_s, 0.5);
        assert!((r.cut.psi - r.cut.psi_complement).abs() < 1e-15);
        assert!(r.cut.psi <= r.pi_boundary / 4.0 + 1e-15);
    }

    #[test]
    fn half_cube_matches_explicit_chain() {
        for (n, p) in [(2, Norm::Inf), (2, Norm::L1), (3, Norm::Inf), (3, Norm::L1)] {
            let depth = 5;
            let r = half_cube_experiment(n, p, depth).unwrap();
            let ctx = WhitneyContext::new(AxisBox::centered_cube(n, 0.5).unwrap(), p);
            let split = HalfSpaceSplit {
                axis: 0,
                half_volumes: [0.5, 0.5],
            };
            let chain = build_aux_chain_partitioned(&ctx, depth, &split).unwrap();
            assert!(chain.detailed_balance_error() < 1e-14);
            let s: Vec<bool> = chain
                .states()
                .iter()
                .map(|st| match st {
                    ChainState::Cube(q) => q.vertex()[0] < 0,
                    ChainState::Fused(c) => *c == 0,
                })
                .collect();
            let cut = cut_conductance(&chain, &s).unwrap();
            assert!((cut.pi_s - r.cut.pi_s).abs() < 1e-14, "n={n}");
            assert!((cut.psi - r.cut.psi).abs() < 1e-14, "n={n}: {} vs {}", cut.psi, r.cut.psi);
        }
    }
}
