//! Batch experiments on the homogeneous model.
//!
//! * [`theorem51_harness`] samples random Newton starts on graphs whose
//!   minimum degree is at least `n − 2` and checks that every non-zero fixed
//!   point found is unstable by three independent routes: the spectrum, an
//!   exhaustive cut scan, and the centroid singleton cut.
//! * [`conjecture51_r`] and [`conjecture51_half_cut`] tabulate the degree threshold
//!   `r(n)`, the smallest `r` with `Σ_{i=1}^r i cos(2πi/n) ≤ 0`, and evaluate the
//!   half-circle cut on evenly spread circulant states.

use std::fmt::{self, Write as _};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::fixpoint::{
    is_zero_fixed_point, random_phases, solve_newton, twisted_state, FixedPoint, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::network::{circulant_network, complete_minus, complete_network, Network};
use crate::stability::{
    centroid_singleton_cut, classify, cut_cosine_sum, min_cut_sum, Classification, ZERO_CLASS_TOL,
};

pub const HARNESS_MIN_N: usize = 3;
pub const HARNESS_MAX_N: usize = 12;

/// Graph family for the degree-class harness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeMode {
    /// `K_n`, all degrees `n − 1`.
    Complete,
    /// `K_n` minus the listed non-edges; every node may lose at most one edge.
    CompleteMinus(Vec<(usize, usize)>),
}

impl DegreeMode {
    pub fn build(&self, n: usize) -> Result<Network> {
        match self {
            Self::Complete => complete_network(n),
            Self::CompleteMinus(non_edges) => {
                let net = complete_minus(n, non_edges)?;
                if net.min_degree() + 2 < n {
                    return Err(Error::Scope(format!(
                        "non-edges leave minimum degree {} < n - 2",
                        net.min_degree()
                    )));
                }
                Ok(net)
            }
        }
    }

    fn label(&self) -> String {
        match self {
            Self::Complete => "complete".into(),
            Self::CompleteMinus(e) => {
                let list: Vec<String> = e.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                format!("complete-minus[{}]", list.join(" "))
            }
        }
    }
}

/// A non-zero fixed point that escaped at least one of the three checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertified {
    pub trial: u64,
    pub theta: Vec<f64>,
    pub classification: Classification,
    pub min_cut_sum: f64,
    pub centroid_cut_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem51Report {
    pub n: usize,
    pub mode: DegreeMode,
    pub trials: u64,
    pub seed: u64,
    pub newton_failures: u64,
    pub zero_class: u64,
    pub nonzero: u64,
    pub unstable_by_spectrum: u64,
    pub certified_by_cut: u64,
    pub certified_by_centroid: u64,
    /// Largest (least negative) centroid singleton cut sum over non-zero points.
    pub worst_centroid_cut: Option<f64>,
    /// Largest exhaustive minimum cut sum over non-zero points.
    pub worst_min_cut: Option<f64>,
    pub uncertified: Vec<Uncertified>,
}

impl Theorem51Report {
    pub fn upheld(&self) -> bool {
        self.uncertified.is_empty()
    }

    /// Line-oriented `key: value` report; byte-identical for identical inputs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.12e}"));
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "network: {}", self.mode.label());
        let _ = writeln!(out, "trials: {}", self.trials);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "newton_failures: {}", self.newton_failures);
        let _ = writeln!(out, "zero_class: {}", self.zero_class);
        let _ = writeln!(out, "nonzero: {}", self.nonzero);
        let _ = writeln!(out, "unstable_by_spectrum: {}", self.unstable_by_spectrum);
        let _ = writeln!(out, "certified_by_cut: {}", self.certified_by_cut);
        let _ = writeln!(out, "certified_by_centroid: {}", self.certified_by_centroid);
        let _ = writeln!(out, "worst_min_cut: {}", opt(self.worst_min_cut));
        let _ = writeln!(out, "worst_centroid_cut: {}", opt(self.worst_centroid_cut));
        let _ = writeln!(out, "uncertified: {}", self.uncertified.len());
        for u in &self.uncertified {
            let theta: Vec<String> = u.theta.iter().map(|t| format!("{t:.12e}")).collect();
            let _ = writeln!(
                out,
                "uncertified_point: trial={} class={} min_cut={:.12e} centroid_cut={:.12e} theta={}",
                u.trial,
                u.classification,
                u.min_cut_sum,
                u.centroid_cut_sum,
                theta.join(",")
            );
        }
        let _ = writeln!(out, "upheld: {}", self.upheld());
        out
    }
}

impl fmt::Display for Theorem51Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

enum Outcome {
    Failed,
    Zero,
    NonZero {
        trial: u64,
        theta: Vec<f64>,
        classification: Classification,
        min_cut: f64,
        centroid_cut: f64,
    },
}

fn run_trial(net: &Network, seed: u64, trial: u64) -> Result<Outcome> {
    let n = net.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial));
    let guess = PhaseState::homogeneous(random_phases(&mut rng, n), 1.0)?;
    let fp = match solve_newton(net, &guess, DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Ok(fp) => fp,
        Err(Error::NoConvergence { .. } | Error::SolverSingular { .. }) => {
            return Ok(Outcome::Failed)
        }
        Err(e) => return Err(e),
    };
    if is_zero_fixed_point(&fp.theta, ZERO_CLASS_TOL) {
        return Ok(Outcome::Zero);
    }
    let classification = classify(net, 1.0, &fp)?.classification;
    let min_cut = min_cut_sum(net, &fp.theta)?.cut_sum;
    let centroid_cut = centroid_singleton_cut(net, &fp)?.cut_sum;
    Ok(Outcome::NonZero {
        trial,
        theta: fp.theta,
        classification,
        min_cut,
        centroid_cut,
    })
}

/// Homogeneous (`ω = 0`, `k = 1`) Newton solves from `trials` seeded uniform starts.
///
/// Trial `t` draws its start from a generator seeded with `seed + t`, so the
/// report does not depend on how trials are scheduled across threads.
pub fn theorem51_harness(
    n: usize,
    mode: &DegreeMode,
    trials: u64,
    seed: u64,
) -> Result<Theorem51Report> {
    if !(HARNESS_MIN_N..=HARNESS_MAX_N).contains(&n) {
        return Err(Error::InvalidSize(format!(
            "harness needs {HARNESS_MIN_N} <= n <= {HARNESS_MAX_N}, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let net = mode.build(n)?;
    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(&net, seed, t))
        .collect::<Result<_>>()?;

    let mut report = Theorem51Report {
        n,
        mode: mode.clone(),
        trials,
        seed,
        newton_failures: 0,
        zero_class: 0,
        nonzero: 0,
        unstable_by_spectrum: 0,
        certified_by_cut: 0,
        certified_by_centroid: 0,
        worst_centroid_cut: None,
        worst_min_cut: None,
        uncertified: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Failed => report.newton_failures += 1,
            Outcome::Zero => report.zero_class += 1,
            Outcome::NonZero {
                trial,
                theta,
                classification,
                min_cut,
                centroid_cut,
            } => {
                report.nonzero += 1;
                let by_spectrum = classification == Classification::Unstable;
                let by_cut = min_cut <= 0.0;
                let by_centroid = centroid_cut <= 1e-9;
                report.unstable_by_spectrum += u64::from(by_spectrum);
                report.certified_by_cut += u64::from(by_cut);
                report.certified_by_centroid += u64::from(by_centroid);
                report.worst_min_cut =
                    Some(report.worst_min_cut.map_or(min_cut, |w| w.max(min_cut)));
                report.worst_centroid_cut = Some(
                    report
                        .worst_centroid_cut
                        .map_or(centroid_cut, |w| w.max(centroid_cut)),
                );
                if !(by_spectrum && by_cut && by_centroid) {
                    report.uncertified.push(Uncertified {
                        trial,
                        theta,
                        classification,
                        min_cut_sum: min_cut,
                        centroid_cut_sum: centroid_cut,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub n: usize,
    pub r: usize,
    /// `2r / n`.
    pub ratio: f64,
    /// `Σ_{i=1}^{r−1} i cos(2πi/n)`.
    pub sum_before: f64,
    /// `Σ_{i=1}^{r} i cos(2πi/n)`, the first partial sum that is `≤ 0`.
    pub sum_at_r: f64,
}

impl ThresholdRow {
    pub const CSV_HEADER: &'static str = "n,r,ratio";

    pub fn to_csv(&self) -> String {
        format!("{},{},{:.12}", self.n, self.r, self.ratio)
    }
}

/// Smallest `r` with `Σ_{i=1}^r i cos(2πi/n) ≤ 0`, by direct summation.
pub fn conjecture51_r(n: usize) -> Result<ThresholdRow> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "threshold needs n >= 3, got {n}"
        )));
    }
    let mut sum = 0.0;
    for r in 1..=n {
        let before = sum;
        sum += r as f64 * (std::f64::consts::TAU * r as f64 / n as f64).cos();
        if sum <= 0.0 {
            return Ok(ThresholdRow {
                n,
                r,
                ratio: 2.0 * r as f64 / n as f64,
                sum_before: before,
                sum_at_r: sum,
            });
        }
    }
    unreachable!("the partial sum at r = n/2 + 1 is already negative")
}

/// Cut-cosine sum of the contiguous half `0..n/2` for the evenly spread state
/// (winding 1) on the circulant graph with offsets `1..=r`.
pub fn conjecture51_half_cut(n: usize, r: usize) -> Result<f64> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::InvalidSize(format!(
            "half cut needs an even n >= 4, got {n}"
        )));
    }
    if r == 0 || r > n / 2 {
        return Err(Error::InvalidOffset { n, offset: r });
    }
    let offsets: Vec<usize> = (1..=r).collect();
    let net = circulant_network(n, &offsets)?;
    let fp = FixedPoint::from_state(&net, &PhaseState::homogeneous(twisted_state(n, 1), 1.0)?)?;
    let half: Vec<usize> = (0..n / 2).collect();
    Ok(cut_cosine_sum(&net, &fp, &half)?.cut_sum)
}
