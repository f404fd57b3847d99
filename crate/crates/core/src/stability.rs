//! Linear stability of fixed points and cut certificates.
//!
//! For a bipartition `(A, B)` of the nodes the cut-cosine sum is
//! `Σ_{i∈A, j∈B} A_ij cos(θ_i* − θ_j*)`. A stable fixed point has every
//! cut-cosine sum strictly positive, so any bipartition whose sum is `≤ 0`
//! certifies that the point is not stable. The converse does not hold: finding
//! no such cut proves nothing.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{kuramoto_rhs, mean_frequency, PhaseState};
use crate::error::{check_len, Error, Result};
use crate::fixpoint::{is_zero_fixed_point, FixedPoint};
use crate::linalg::{eigen_symmetric, Matrix};
use crate::network::Network;

/// Largest node count accepted by the exhaustive cut scan.
pub const EXHAUSTIVE_MAX_N: usize = 20;
/// Random restarts used by the heuristic cut search.
pub const HEURISTIC_RESTARTS: usize = 50;
/// Residual bound a point must meet before it is classified.
pub const FIXED_POINT_GATE: f64 = 1e-8;
/// Wrapped pairwise tolerance below which a point counts as the zero solution.
pub const ZERO_CLASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
    Degenerate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
            Self::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Jacobian spectrum, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues inside `(−τ, τ)`.
    pub zero_modes: usize,
    pub classification: Classification,
    pub tau: f64,
}

impl StabilityReport {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutCertificate {
    /// Sorted node ids of `A`.
    pub subset: Vec<usize>,
    pub cut_sum: f64,
    pub certifies_instability: bool,
}

/// Linearisation of the dynamics at `theta`: off-diagonal `k A_ij cos(θ_j − θ_i)`,
/// diagonal minus the row's off-diagonal sum.
pub fn jacobian(net: &Network, k: f64, theta: &[f64]) -> Result<Matrix> {
    check_len(net.n(), theta.len())?;
    let n = net.n();
    let mut jac = Matrix::zeros(n);
    for &(i, j) in net.edges() {
        let c = k * (theta[j] - theta[i]).cos();
        jac[(i, j)] = c;
        jac[(j, i)] = c;
    }
    for i in 0..n {
        let s: f64 = net.neighbors(i).iter().map(|&j| jac[(i, j)]).sum();
        jac[(i, i)] = -s;
    }
    Ok(jac)
}

/// Classifies a fixed point from its Jacobian spectrum with `τ = 1e−8 · k · n`.
///
/// The rotation mode always contributes one zero eigenvalue. A further
/// eigenvalue in `(−τ, τ)` on a connected graph makes the point marginal;
/// disconnected graphs are reported as degenerate.
pub fn classify(net: &Network, k: f64, fp: &FixedPoint) -> Result<StabilityReport> {
    if !(fp.residual_norm < FIXED_POINT_GATE) {
        return Err(Error::Precondition(format!(
            "residual {:e} too large to classify",
            fp.residual_norm
        )));
    }
    let jac = jacobian(net, k, &fp.theta)?;
    let eigenvalues = eigen_symmetric(&jac)?.values;
    let tau = 1e-8 * k * net.n() as f64;
    let zero_modes = eigenvalues.iter().filter(|x| x.abs() < tau).count();
    let classification = if !net.is_connected() {
        Classification::Degenerate
    } else if eigenvalues.iter().any(|&x| x > tau) {
        Classification::Unstable
    } else if zero_modes == 1 {
        Classification::Stable
    } else {
        Classification::Marginal
    };
    Ok(StabilityReport {
        eigenvalues,
        zero_modes,
        classification,
        tau,
    })
}

/// Membership mask for a nonempty proper subset.
fn subset_mask(n: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::Precondition(format!("node {i} outside 0..{n}")));
        }
        mask[i] = true;
    }
    let size = mask.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return Err(Error::Precondition(
            "subset must be a nonempty proper subset of the nodes".into(),
        ));
    }
    Ok(mask)
}

fn members(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

/// `|A| ω̄ − Σ_{i∈A} ω_i − k Σ_{i∈A, j∉A} A_ij sin(θ_j* − θ_i*)`.
///
/// Every fixed point makes this vanish for every bipartition: edges inside `A`
/// cancel in pairs, leaving only the cut.
pub fn partition_flow_identity(
    net: &Network,
    state: &PhaseState,
    fp: &FixedPoint,
    subset: &[usize],
) -> Result<f64> {
    let n = net.n();
    check_len(n, state.omega.len())?;
    check_len(n, fp.theta.len())?;
    if !(fp.residual_norm < FIXED_POINT_GATE) {
        return Err(Error::Precondition(format!(
            "residual {:e} too large for a fixed point",
            fp.residual_norm
        )));
    }
    let mask = subset_mask(n, subset)?;
    let omega_bar = mean_frequency(&state.omega)?;
    let theta = &fp.theta;
    let mut size = 0.0;
    let mut omega_in = 0.0;
    let mut flow = 0.0;
    for i in (0..n).filter(|&i| mask[i]) {
        size += 1.0;
        omega_in += state.omega[i];
        for &j in net.neighbors(i) {
            if !mask[j] {
                flow += (theta[j] - theta[i]).sin();
            }
        }
    }
    Ok(size * omega_bar - omega_in - state.k * flow)
}

fn cut_sum_masked(net: &Network, theta: &[f64], mask: &[bool]) -> f64 {
    net.edges()
        .iter()
        .filter(|&&(i, j)| mask[i] != mask[j])
        .map(|&(i, j)| (theta[i] - theta[j]).cos())
        .sum()
}

fn certificate(net: &Network, theta: &[f64], mask: &[bool]) -> CutCertificate {
    let cut_sum = cut_sum_masked(net, theta, mask);
    CutCertificate {
        subset: members(mask),
        cut_sum,
        certifies_instability: cut_sum <= 0.0,
    }
}

/// Cut-cosine sum of the bipartition `(A, complement of A)`.
pub fn cut_cosine_sum(net: &Network, fp: &FixedPoint, subset: &[usize]) -> Result<CutCertificate> {
    check_len(net.n(), fp.theta.len())?;
    let mask = subset_mask(net.n(), subset)?;
    Ok(certificate(net, &fp.theta, &mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSearch {
    /// Every bipartition; `n ≤ 20`.
    Exhaustive,
    /// Singleton cuts, then greedy single-node moves from the singletons and from
    /// [`HEURISTIC_RESTARTS`] random bipartitions drawn with `seed`.
    Heuristic { seed: u64 },
}

/// Searches for a bipartition with non-positive cut-cosine sum.
///
/// The exhaustive scan returns the minimum over all `2^(n−1) − 1` bipartitions
/// (node `n − 1` is always on the `B` side; ties go to the smallest encoding)
/// if it is `≤ 0`. The heuristic returns the best cut it finds if that is `≤ 0`.
pub fn find_unstable_cut(
    net: &Network,
    fp: &FixedPoint,
    mode: CutSearch,
) -> Result<Option<CutCertificate>> {
    let n = net.n();
    check_len(n, fp.theta.len())?;
    if n < 2 {
        return Ok(None);
    }
    let best = match mode {
        CutSearch::Exhaustive => {
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::InvalidSize(format!(
                    "exhaustive cut search is limited to n <= {EXHAUSTIVE_MAX_N}, got {n}"
                )));
            }
            let mask = exhaustive_min(net, &fp.theta);
            certificate(net, &fp.theta, &mask)
        }
        CutSearch::Heuristic { seed } => heuristic_min(net, &fp.theta, seed),
    };
    Ok(best.certifies_instability.then_some(best))
}

/// Minimum cut-cosine sum over every bipartition, with its `A` side.
pub fn min_cut_sum(net: &Network, theta: &[f64]) -> Result<CutCertificate> {
    let n = net.n();
    check_len(n, theta.len())?;
    if !(2..=EXHAUSTIVE_MAX_N).contains(&n) {
        return Err(Error::InvalidSize(format!(
            "exhaustive cut search needs 2 <= n <= {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }
    Ok(certificate(net, theta, &exhaustive_min(net, theta)))
}

fn exhaustive_min(net: &Network, theta: &[f64]) -> Vec<bool> {
    let n = net.n();
    // bit e of an edge mask set ⇔ the edge crosses the cut; evaluate over precomputed cosines
    let cosines: Vec<(usize, usize, f64)> = net
        .edges()
        .iter()
        .map(|&(i, j)| (i, j, (theta[i] - theta[j]).cos()))
        .collect();
    let eval = |code: u32| -> f64 {
        cosines
            .iter()
            .filter(|&&(i, j, _)| ((code >> i) ^ (code >> j)) & 1 == 1)
            .map(|&(_, _, c)| c)
            .sum()
    };
    let total: u32 = 1 << (n - 1);
    let better = |a: (f64, u32), b: (f64, u32)| match a.0.total_cmp(&b.0) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    };
    const CHUNK: u32 = 4096;
    let (_, code) = if total <= CHUNK {
        (1..total)
            .map(|c| (eval(c), c))
            .fold((f64::INFINITY, 0), better)
    } else {
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = (c * CHUNK).max(1);
                let hi = ((c + 1) * CHUNK).min(total);
                (lo..hi)
                    .map(|m| (eval(m), m))
                    .fold((f64::INFINITY, 0), better)
            })
            .reduce(|| (f64::INFINITY, 0), better)
    };
    (0..n).map(|i| (code >> i) & 1 == 1).collect()
}

fn heuristic_min(net: &Network, theta: &[f64], seed: u64) -> CutCertificate {
    let n = net.n();
    let mut best: Option<CutCertificate> = None;
    let mut consider = |mask: &[bool]| {
        let cert = certificate(net, theta, mask);
        if best.as_ref().is_none_or(|b| cert.cut_sum < b.cut_sum) {
            best = Some(cert);
        }
    };

    let singletons: Vec<Vec<bool>> = (0..n).map(|m| (0..n).map(|i| i == m).collect()).collect();
    for mask in &singletons {
        consider(mask);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let restarts: Vec<Vec<bool>> = (0..HEURISTIC_RESTARTS)
        .map(|_| {
            let mut mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            let size = mask.iter().filter(|&&b| b).count();
            if size == 0 {
                mask[rng.gen_range(0..n)] = true;
            } else if size == n {
                mask[rng.gen_range(0..n)] = false;
            }
            mask
        })
        .collect();

    for start in singletons.into_iter().chain(restarts) {
        let improved = greedy_descent(net, theta, start);
        consider(&improved);
    }
    best.expect("n >= 2 gives at least one singleton cut")
}

/// Moves single nodes across the cut, steepest first, while the sum decreases.
fn greedy_descent(net: &Network, theta: &[f64], mut mask: Vec<bool>) -> Vec<bool> {
    let n = net.n();
    let mut size = mask.iter().filter(|&&b| b).count();
    loop {
        let mut best_gain = 0.0;
        let mut best_node = None;
        for v in 0..n {
            let leaving_a = mask[v];
            if (leaving_a && size == 1) || (!leaving_a && size == n - 1) {
                continue;
            }
            // change in cut sum if v switches sides
            let gain: f64 = net
                .neighbors(v)
                .iter()
                .map(|&u| {
                    let c = (theta[v] - theta[u]).cos();
                    if mask[u] == mask[v] {
                        c
                    } else {
                        -c
                    }
                })
                .sum();
            if gain < best_gain - 1e-15 {
                best_gain = gain;
                best_node = Some(v);
            }
        }
        match best_node {
            Some(v) => {
                if mask[v] {
                    size -= 1;
                } else {
                    size += 1;
                }
                mask[v] = !mask[v];
            }
            None => return mask,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationProbe {
    /// `|A| ω̄ − Σ_{i∈A} θ̇_i(0)` evaluated exactly.
    pub lhs: f64,
    /// First-order prediction `k n ε Σ_{i∈A, j∈B} A_ij cos(θ_j* − θ_i*)`.
    pub rhs: f64,
    /// `lhs / rhs`; `None` when `rhs == 0`.
    pub ratio: Option<f64>,
}

/// Shifts `A` by `+ε|B|` and `B` by `−ε|A|` (a zero-sum perturbation) and
/// compares the exact frequency deficit of `A` with its first-order prediction.
pub fn perturbation_probe(
    net: &Network,
    state: &PhaseState,
    fp: &FixedPoint,
    subset: &[usize],
    eps: f64,
) -> Result<PerturbationProbe> {
    let n = net.n();
    check_len(n, fp.theta.len())?;
    if !(eps >= 0.0) {
        return Err(Error::Precondition(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    let mask = subset_mask(n, subset)?;
    let a_size = mask.iter().filter(|&&b| b).count();
    let b_size = n - a_size;
    let omega_bar = mean_frequency(&state.omega)?;

    let perturbed: Vec<f64> = fp
        .theta
        .iter()
        .zip(&mask)
        .map(|(&t, &in_a)| {
            if in_a {
                t + eps * b_size as f64
            } else {
                t - eps * a_size as f64
            }
        })
        .collect();
    let rates = kuramoto_rhs(
        net,
        &PhaseState::new(perturbed, state.omega.clone(), state.k)?,
    )?;
    let in_a: f64 = (0..n).filter(|&i| mask[i]).map(|i| rates[i]).sum();
    let lhs = a_size as f64 * omega_bar - in_a;

    let cut = cut_sum_masked(net, &fp.theta, &mask);
    let rhs = state.k * n as f64 * eps * cut;
    let ratio = (rhs != 0.0).then(|| lhs / rhs);
    Ok(PerturbationProbe { lhs, rhs, ratio })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidCut {
    pub node: usize,
    /// Singleton cut-cosine sum at `node`.
    pub cut_sum: f64,
    /// `|S|` with `S = Σ_j e^{iθ_j}`.
    pub centroid_magnitude: f64,
}

/// Locates a singleton cut with non-positive sum on graphs of minimum degree
/// `≥ n − 2`.
///
/// With `S = Σ_j e^{iθ_j}`, `Re(conj(z_m) S) = 1 + Σ_{j≠m} cos(θ_j − θ_m)`, which bounds
/// node `m`'s singleton cut sum from above when `m` misses at most one neighbour.
/// If `S ≠ 0` the node minimising `z_m · S` lies in the half-plane opposite `S`;
/// if `S = 0` every node qualifies and the smallest singleton sum is returned.
pub fn centroid_singleton_cut(net: &Network, fp: &FixedPoint) -> Result<CentroidCut> {
    let n = net.n();
    check_len(n, fp.theta.len())?;
    if n < 2 || net.min_degree() + 2 < n {
        return Err(Error::Scope(format!(
            "minimum degree {} is below n - 2 = {}",
            net.min_degree(),
            n.saturating_sub(2)
        )));
    }
    if is_zero_fixed_point(&fp.theta, ZERO_CLASS_TOL) {
        return Err(Error::Precondition(
            "the zero fixed point has no unstable cut".into(),
        ));
    }
    let theta = &fp.theta;
    let sx: f64 = theta.iter().map(|t| t.cos()).sum();
    let sy: f64 = theta.iter().map(|t| t.sin()).sum();
    let magnitude = sx.hypot(sy);

    let singleton = |m: usize| -> f64 {
        net.neighbors(m)
            .iter()
            .map(|&j| (theta[m] - theta[j]).cos())
            .sum()
    };
    let argmin = |score: &dyn Fn(usize) -> f64| -> usize {
        (0..n)
            .min_by(|&a, &b| score(a).total_cmp(&score(b)).then(a.cmp(&b)))
            .expect("n >= 2")
    };
    let node = if magnitude < 1e-9 {
        argmin(&singleton)
    } else {
        argmin(&|m| theta[m].cos() * sx + theta[m].sin() * sy)
    };
    Ok(CentroidCut {
        node,
        cut_sum: singleton(node),
        centroid_magnitude: magnitude,
    })
}
