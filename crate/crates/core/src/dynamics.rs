//! Right-hand side of the network Kuramoto equation, fixed-step RK4, and the
//! per-node monotone-convergence probe.

use std::fmt::Write as _;

use crate::error::{check_len, Error, Result};
use crate::fixpoint::FixedPoint;
use crate::network::Network;

/// Phases (unwrapped radians), natural frequencies and coupling constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub k: f64,
}

impl PhaseState {
    pub fn new(theta: Vec<f64>, omega: Vec<f64>, k: f64) -> Result<Self> {
        check_len(theta.len(), omega.len())?;
        if !(k > 0.0) {
            return Err(Error::Precondition(format!(
                "coupling k must be positive, got {k}"
            )));
        }
        Ok(Self { theta, omega, k })
    }

    /// All natural frequencies zero.
    pub fn homogeneous(theta: Vec<f64>, k: f64) -> Result<Self> {
        let n = theta.len();
        Self::new(theta, vec![0.0; n], k)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    fn check(&self, net: &Network) -> Result<()> {
        check_len(net.n(), self.theta.len())?;
        check_len(net.n(), self.omega.len())
    }
}

/// `k Σ_j A_ij sin(θ_j − θ_i)` for every node, written into `out`.
pub(crate) fn coupling_into(net: &Network, k: f64, theta: &[f64], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let ti = theta[i];
        let s: f64 = net
            .neighbors(i)
            .iter()
            .map(|&j| (theta[j] - ti).sin())
            .sum();
        *slot = k * s;
    }
}

fn rhs_into(net: &Network, omega: &[f64], k: f64, theta: &[f64], out: &mut [f64]) {
    coupling_into(net, k, theta, out);
    for (o, w) in out.iter_mut().zip(omega) {
        *o += w;
    }
}

/// `ω_i + k Σ_j A_ij sin(θ_j − θ_i)`.
pub fn kuramoto_rhs(net: &Network, state: &PhaseState) -> Result<Vec<f64>> {
    state.check(net)?;
    let mut out = vec![0.0; net.n()];
    rhs_into(net, &state.omega, state.k, &state.theta, &mut out);
    Ok(out)
}

/// The common frequency `ω̄` of any frequency fixed point.
pub fn mean_frequency(omega: &[f64]) -> Result<f64> {
    if omega.is_empty() {
        return Err(Error::Shape {
            expected: 1,
            got: 0,
        });
    }
    Ok(omega.iter().sum::<f64>() / omega.len() as f64)
}

/// Step size `0.01 / (k · d_max)`.
pub fn default_step(net: &Network, k: f64) -> f64 {
    0.01 / (k * net.max_degree().max(1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// CSV with a `t,theta_0,...` header row.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.theta.len());
        let mut out = String::from("t");
        for i in 0..n {
            let _ = write!(out, ",theta_{i}");
        }
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{}", s.t);
            for x in &s.theta {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Classical fourth-order Runge–Kutta with a fixed step.
///
/// Records the initial state, every `record_every`-th step, and always the final state.
pub fn integrate_rk4(
    net: &Network,
    state: &PhaseState,
    h: f64,
    steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    state.check(net)?;
    if !(h > 0.0) {
        return Err(Error::Precondition(format!(
            "step size must be positive, got {h}"
        )));
    }
    if record_every == 0 {
        return Err(Error::Precondition("record_every must be positive".into()));
    }
    let n = net.n();
    let (omega, k) = (&state.omega, state.k);
    let mut theta = state.theta.clone();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let mut samples = vec![Sample {
        t: 0.0,
        theta: theta.clone(),
    }];
    for step in 1..=steps {
        rhs_into(net, omega, k, &theta, &mut k1);
        for i in 0..n {
            tmp[i] = theta[i] + 0.5 * h * k1[i];
        }
        rhs_into(net, omega, k, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = theta[i] + 0.5 * h * k2[i];
        }
        rhs_into(net, omega, k, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = theta[i] + h * k3[i];
        }
        rhs_into(net, omega, k, &tmp, &mut k4);
        for i in 0..n {
            theta[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % record_every == 0 || step == steps {
            samples.push(Sample {
                t: step as f64 * h,
                theta: theta.clone(),
            });
        }
    }
    Ok(Trajectory { samples })
}

/// Side from which a node's deviation `θ_i(t) − θ_i*(t)` approaches zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    /// Deviation positive and shrinking.
    FromAbove,
    /// Deviation negative and shrinking in magnitude.
    FromBelow,
    /// Deviation identically zero after the transient.
    AtRest,
    /// Deviation not monotone or not shrinking.
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub monotone: Vec<bool>,
    /// Decay exponent `λ_i` from a log-linear fit; only set for monotone nodes.
    pub fitted_rate: Vec<Option<f64>>,
    pub approach: Vec<Approach>,
    pub converged: bool,
    /// Max-norm of the deviation at the last sample.
    pub final_distance: f64,
}

const TRANSIENT_FRACTION: f64 = 0.05;
const MONOTONE_SLACK: f64 = 1e-12;
const CONVERGED_DISTANCE: f64 = 1e-8;
// below this the deviation is dominated by rounding and is left out of the fit
const FIT_FLOOR: f64 = 1e-13;

/// Integrates from `θ*(0) + δ` and checks that each node returns to the
/// fixed point monotonically.
///
/// The deviation of node `i` is `θ_i(t) − θ_i*(0) − ω̄ t`. A node is monotone when its
/// successive deviation differences (after discarding the first 5% of samples)
/// keep one sign up to `1e−12`. A node gets a fitted rate `λ_i` when it is monotone
/// and `ln|deviation|` has a negative least-squares slope.
pub fn monotonicity_probe(
    net: &Network,
    omega: &[f64],
    k: f64,
    fp: &FixedPoint,
    delta: &[f64],
    h: f64,
    steps: usize,
) -> Result<MonotonicityReport> {
    let n = net.n();
    check_len(n, omega.len())?;
    check_len(n, delta.len())?;
    check_len(n, fp.theta.len())?;
    let drift: f64 = delta.iter().sum();
    if drift.abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "perturbation must sum to zero, sums to {drift:e}"
        )));
    }
    if !(fp.residual_norm < 1e-8) {
        return Err(Error::Precondition(format!(
            "fixed point residual {:e} is not small",
            fp.residual_norm
        )));
    }
    let omega_bar = mean_frequency(omega)?;
    let start: Vec<f64> = fp.theta.iter().zip(delta).map(|(t, d)| t + d).collect();
    let state = PhaseState::new(start, omega.to_vec(), k)?;
    let traj = integrate_rk4(net, &state, h, steps, 1)?;

    let deviations: Vec<(f64, Vec<f64>)> = traj
        .samples
        .iter()
        .map(|s| {
            let dev = s
                .theta
                .iter()
                .zip(&fp.theta)
                .map(|(x, x0)| x - x0 - omega_bar * s.t)
                .collect();
            (s.t, dev)
        })
        .collect();

    let skip = (deviations.len() as f64 * TRANSIENT_FRACTION).floor() as usize;
    let tail = &deviations[skip..];

    let mut monotone = Vec::with_capacity(n);
    let mut fitted_rate = Vec::with_capacity(n);
    let mut approach = Vec::with_capacity(n);
    for i in 0..n {
        let series: Vec<f64> = tail.iter().map(|(_, d)| d[i]).collect();
        let non_increasing = series.windows(2).all(|w| w[1] - w[0] <= MONOTONE_SLACK);
        let non_decreasing = series.windows(2).all(|w| w[1] - w[0] >= -MONOTONE_SLACK);
        let is_monotone = non_increasing || non_decreasing;
        monotone.push(is_monotone);

        let first = series.first().copied().unwrap_or(0.0);
        let last = series.last().copied().unwrap_or(0.0);
        let shrinking = last.abs() <= first.abs();
        approach.push(if series.iter().all(|&d| d == 0.0) {
            Approach::AtRest
        } else if is_monotone && shrinking && first > 0.0 {
            Approach::FromAbove
        } else if is_monotone && shrinking && first < 0.0 {
            Approach::FromBelow
        } else {
            Approach::Neither
        });

        let rate = if is_monotone {
            let pts: Vec<(f64, f64)> = tail
                .iter()
                .filter(|(_, d)| d[i].abs() > FIT_FLOOR)
                .map(|(t, d)| (*t, d[i].abs().ln()))
                .collect();
            log_linear_slope(&pts).filter(|s| *s < 0.0).map(|s| -s)
        } else {
            None
        };
        fitted_rate.push(rate);
    }

    let final_distance = deviations
        .last()
        .map(|(_, d)| d.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .unwrap_or(0.0);

    Ok(MonotonicityReport {
        monotone,
        fitted_rate,
        approach,
        converged: final_distance < CONVERGED_DISTANCE,
        final_distance,
    })
}

fn log_linear_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let tx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ty = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tx) * (p.1 - ty)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
