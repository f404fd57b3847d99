//! Frequency fixed points: residuals, the grounded damped Newton solver,
//! twisted states and zero-class detection.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;

use crate::dynamics::{coupling_into, mean_frequency, PhaseState};
use crate::error::{check_len, Error, Result};
use crate::linalg::{lu_solve, Matrix};
use crate::network::Network;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;

/// A phase configuration at `t = 0` that solves the fixed-point equations.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    /// Phases re-based so `theta[grounded_node] == 0`, wrapped to `(−π, π]`.
    pub theta: Vec<f64>,
    /// Max-norm of [`residual`] at `theta`.
    pub residual_norm: f64,
    /// All natural frequencies equal.
    pub homogeneous: bool,
    pub grounded_node: usize,
    /// Newton iterations used; zero for points built with [`FixedPoint::from_state`].
    pub iterations: usize,
}

impl FixedPoint {
    /// Wraps a known configuration (for instance a twisted state) without solving.
    /// The residual is evaluated so callers can check it.
    pub fn from_state(net: &Network, state: &PhaseState) -> Result<Self> {
        let r = residual(net, state)?;
        Ok(Self {
            theta: grounded(&state.theta),
            residual_norm: max_norm(&r),
            homogeneous: is_homogeneous(&state.omega),
            grounded_node: 0,
            iterations: 0,
        })
    }

    pub fn to_csv_line(&self) -> String {
        phases_to_csv(&self.theta)
    }
}

/// `θ` joined by commas, full round-trip precision.
pub fn phases_to_csv(theta: &[f64]) -> String {
    let mut out = String::new();
    for (i, x) in theta.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{x:?}");
    }
    out.push('\n');
    out
}

/// Reads phases separated by commas, whitespace or newlines. `#` starts a
/// comment line.
pub fn phases_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            out.push(tok.parse().map_err(|_| Error::Format {
                line: idx + 1,
                msg: format!("not a number: {tok:?}"),
            })?);
        }
    }
    if out.is_empty() {
        return Err(Error::Format {
            line: 0,
            msg: "no phase values".into(),
        });
    }
    Ok(out)
}

fn is_homogeneous(omega: &[f64]) -> bool {
    omega.windows(2).all(|w| w[0] == w[1])
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

fn grounded(theta: &[f64]) -> Vec<f64> {
    let Some(&base) = theta.first() else {
        return Vec::new();
    };
    theta.iter().map(|x| wrap_angle(x - base)).collect()
}

/// `ω̄ − ω_i − k Σ_j A_ij sin(θ_j − θ_i)`; zero exactly at frequency fixed points.
pub fn residual(net: &Network, state: &PhaseState) -> Result<Vec<f64>> {
    check_len(net.n(), state.theta.len())?;
    check_len(net.n(), state.omega.len())?;
    let omega_bar = mean_frequency(&state.omega)?;
    let mut out = vec![0.0; net.n()];
    residual_into(
        net,
        state.k,
        &state.omega,
        omega_bar,
        &state.theta,
        &mut out,
    );
    Ok(out)
}

fn residual_into(
    net: &Network,
    k: f64,
    omega: &[f64],
    omega_bar: f64,
    theta: &[f64],
    out: &mut [f64],
) {
    coupling_into(net, k, theta, out);
    for (r, w) in out.iter_mut().zip(omega) {
        *r = omega_bar - w - *r;
    }
}

/// Jacobian of the residual restricted to nodes `1..n` (node 0 pinned).
fn reduced_jacobian(net: &Network, k: f64, theta: &[f64]) -> Matrix {
    let n = net.n();
    let mut jac = Matrix::zeros(n - 1);
    for i in 1..n {
        let mut diag = 0.0;
        for &j in net.neighbors(i) {
            let c = k * (theta[j] - theta[i]).cos();
            diag += c;
            if j > 0 {
                jac[(i - 1, j - 1)] = -c;
            }
        }
        jac[(i - 1, i - 1)] = diag;
    }
    jac
}

/// Damped Newton solve of the fixed-point equations with node 0 pinned at phase 0.
///
/// Equation 0 is dropped (the residual always sums to zero) leaving `n − 1`
/// equations in `n − 1` unknowns. A step is halved, up to 30 times, while it
/// would increase the residual max-norm. Success means the full residual
/// max-norm is below `tol`.
pub fn solve_newton(
    net: &Network,
    guess: &PhaseState,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    check_len(net.n(), guess.theta.len())?;
    check_len(net.n(), guess.omega.len())?;
    let n = net.n();
    let (k, omega) = (guess.k, &guess.omega);
    let omega_bar = mean_frequency(omega)?;
    // iterates stay wrapped so the convergence check runs on the returned representative
    let mut theta = grounded(&guess.theta);

    let mut r = vec![0.0; n];
    residual_into(net, k, omega, omega_bar, &theta, &mut r);
    let mut norm = max_norm(&r);
    let mut trial = theta.clone();
    let mut r_trial = vec![0.0; n];

    let mut iterations = 0;
    while norm >= tol {
        if iterations == max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;

        let jac = reduced_jacobian(net, k, &theta);
        let rhs: Vec<f64> = r[1..].iter().map(|x| -x).collect();
        let step = lu_solve(&jac, &rhs).ok_or(Error::SolverSingular {
            iteration: iterations,
        })?;

        let mut scale = 1.0;
        for halving in 0..=MAX_HALVINGS {
            for i in 1..n {
                trial[i] = wrap_angle(theta[i] + scale * step[i - 1]);
            }
            residual_into(net, k, omega, omega_bar, &trial, &mut r_trial);
            if max_norm(&r_trial) <= norm || halving == MAX_HALVINGS {
                break;
            }
            scale *= 0.5;
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut r, &mut r_trial);
        norm = max_norm(&r);
    }

    Ok(FixedPoint {
        theta,
        residual_norm: norm,
        homogeneous: is_homogeneous(omega),
        grounded_node: 0,
        iterations,
    })
}

/// `θ_i = 2π q i / n`: the evenly wound state with winding number `q`.
///
/// `q i` is reduced mod `n` in integer arithmetic first, so every phase lies in
/// `[0, 2π)` and large windings keep full precision.
pub fn twisted_state(n: usize, q: i64) -> Vec<f64> {
    let m = n as i64;
    (0..m)
        .map(|i| TAU * (q * i).rem_euclid(m.max(1)) as f64 / n as f64)
        .collect()
}

/// True when every wrapped pairwise difference is below `tol`, i.e. the state is a
/// rotation of the all-zero solution.
pub fn is_zero_fixed_point(theta: &[f64], tol: f64) -> bool {
    theta.iter().enumerate().all(|(i, &a)| {
        theta[i + 1..]
            .iter()
            .all(|&b| wrap_angle(a - b).abs() < tol)
    })
}

/// Uniform draw from `(−π, π]^n`.
pub fn random_phases<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| PI - TAU * rng.gen::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{complete_network, cycle_network, Network};
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    fn homog(theta: Vec<f64>) -> PhaseState {
        PhaseState::homogeneous(theta, 1.0).unwrap()
    }

    #[test]
    fn residual_examples() {
        let k3 = complete_network(3).unwrap();
        let st = PhaseState::new(vec![0.7; 3], vec![2.0; 3], 1.5).unwrap();
        assert_eq!(residual(&k3, &st).unwrap(), vec![0.0; 3]);

        let c6 = cycle_network(6).unwrap();
        let r = residual(&c6, &homog(twisted_state(6, 1))).unwrap();
        assert!(max_norm(&r) < 1e-15, "{r:?}");

        let r = residual(&k3, &homog(vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0])).unwrap();
        assert!(max_norm(&r) < 1e-15);

        assert!(residual(&k3, &homog(vec![0.0; 4])).is_err());
    }

    #[test]
    fn twisted_states() {
        assert_eq!(twisted_state(5, 0), vec![0.0; 5]);
        let t = twisted_state(6, 1);
        for w in t.windows(2) {
            assert!((w[1] - w[0] - PI / 3.0).abs() < 1e-15);
        }
        let t = twisted_state(3, 1);
        assert!((t[1] - TAU / 3.0).abs() < 1e-15 && (t[2] - 2.0 * TAU / 3.0).abs() < 1e-15);
    }

    #[test]
    fn twisted_states_are_cycle_fixed_points() {
        for n in 3..=64usize {
            let net = cycle_network(n).unwrap();
            let qmax = ((n as i64) - 1) / 2;
            for q in -qmax..=qmax {
                let r = residual(&net, &homog(twisted_state(n, q))).unwrap();
                assert!(max_norm(&r) < 1e-14, "n={n} q={q} {:e}", max_norm(&r));
            }
        }
    }

    #[test]
    fn zero_class() {
        assert!(is_zero_fixed_point(&[1.3; 5], 1e-6));
        assert!(is_zero_fixed_point(&[-PI, PI], 1e-6));
        assert!(!is_zero_fixed_point(&twisted_state(6, 1), 1e-6));
        assert!(is_zero_fixed_point(&[0.0, 0.5e-6], 1e-6));
        assert!(!is_zero_fixed_point(&[0.0, 2e-6], 1e-6));
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn newton_at_solution() {
        let k4 = complete_network(4).unwrap();
        let fp = solve_newton(&k4, &homog(vec![0.3; 4]), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fp.iterations <= 1);
        assert_eq!(fp.theta, vec![0.0; 4]);
        assert!(fp.homogeneous);
    }

    #[test]
    fn newton_finds_equilateral() {
        let k3 = complete_network(3).unwrap();
        let guess = vec![0.1, TAU / 3.0 - 0.1, -TAU / 3.0 + 0.1];
        let fp = solve_newton(&k3, &homog(guess), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(fp.theta[0], 0.0);
        let r = residual(&k3, &homog(fp.theta.clone())).unwrap();
        assert!(max_norm(&r) < 1e-12);
        assert!((wrap_angle(fp.theta[1] - fp.theta[2]).abs() - TAU / 3.0).abs() < 1e-10);
        assert!(!is_zero_fixed_point(&fp.theta, 1e-6));
    }

    #[test]
    fn newton_recovers_twisted_ring() {
        let c6 = cycle_network(6).unwrap();
        let guess: Vec<f64> = twisted_state(6, 1)
            .iter()
            .enumerate()
            .map(|(i, x)| x + 0.05 * ((i * 7 % 5) as f64 - 2.0))
            .collect();
        let fp = solve_newton(&c6, &homog(guess), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let want = twisted_state(6, 1);
        for (a, b) in fp.theta.iter().zip(&want) {
            assert!(wrap_angle(a - b).abs() < 1e-10, "{:?}", fp.theta);
        }
    }

    #[test]
    fn newton_two_node_closed_form() {
        let k2 = complete_network(2).unwrap();
        let st = PhaseState::new(vec![0.0, 0.0], vec![1.0, -1.0], 2.0).unwrap();
        let fp = solve_newton(&k2, &st, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        // ω̄ − ω_0 = k sin(θ_1 − θ_0)  ⇒  sin = −1/2
        assert!((fp.theta[1].sin() + 0.5).abs() < 1e-12);
        assert!(!fp.homogeneous);
    }

    #[test]
    fn newton_failures_are_reported() {
        let net = Network::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let err = solve_newton(&net, &homog(vec![0.0, 0.1, 0.2, 0.4]), DEFAULT_TOL, 50);
        assert!(matches!(err, Err(Error::SolverSingular { .. })), "{err:?}");

        // no fixed point exists when |ω_1 − ω_0| > 2k
        let k2 = complete_network(2).unwrap();
        let st = PhaseState::new(vec![0.0, 0.0], vec![3.0, -3.0], 1.0).unwrap();
        let err = solve_newton(&k2, &st, DEFAULT_TOL, 20);
        assert!(
            matches!(
                err,
                Err(Error::NoConvergence { .. }) | Err(Error::SolverSingular { .. })
            ),
            "{err:?}"
        );
        assert!(solve_newton(&k2, &st, 0.0, 20).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = vec![0.0, -1.25, std::f64::consts::PI, 1e-17];
        assert_eq!(phases_from_csv(&phases_to_csv(&t)).unwrap(), t);
        assert_eq!(
            phases_from_csv("1 2\n3,4\n").unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert!(phases_from_csv("1,a").is_err());
        assert!(phases_from_csv("").is_err());
    }

    fn ring_with_chords() -> Network {
        Network::from_edges(
            7,
            [
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 0),
                (0, 3),
                (2, 5),
            ],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn residual_sums_to_zero_and_ignores_rotation(
            theta in proptest::collection::vec(-10.0f64..10.0, 7),
            omega in proptest::collection::vec(-1.0f64..1.0, 7),
            k in 0.1f64..5.0,
            c in -20.0f64..20.0,
        ) {
            let net = ring_with_chords();
            let st = PhaseState::new(theta.clone(), omega.clone(), k).unwrap();
            let r = residual(&net, &st).unwrap();
            prop_assert!(r.iter().sum::<f64>().abs() < 1e-12);
            let shifted = PhaseState::new(theta.iter().map(|x| x + c).collect(), omega, k).unwrap();
            let r2 = residual(&net, &shifted).unwrap();
            for (a, b) in r.iter().zip(&r2) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn newton_successes_recheck(seed in any::<u64>()) {
            use rand::{Rng as _, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let net = ring_with_chords();
            let omega: Vec<f64> = (0..7).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let st = PhaseState::new(random_phases(&mut rng, 7), omega.clone(), 2.0).unwrap();
            if let Ok(fp) = solve_newton(&net, &st, 1e-12, 100) {
                let check = residual(&net, &PhaseState::new(fp.theta.clone(), omega, 2.0).unwrap()).unwrap();
                prop_assert!(max_norm(&check) < 1e-12);
                prop_assert_eq!(fp.theta[0], 0.0);
            }
        }
    }
}
