//! Subcommand implementations. Each one builds its inputs from a
//! [`RunConfig`] and writes a `key: value` report or a data file.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use kuramoto_core::dynamics::{default_step, integrate_rk4};
use kuramoto_core::experiments::{
    conjecture51_half_cut, conjecture51_r, theorem51_harness, DegreeMode, ThresholdRow,
};
use kuramoto_core::fixpoint::{phases_from_csv, random_phases, solve_newton, twisted_state};
use kuramoto_core::network::{
    circulant_network, complete_network, cycle_network, load_edge_list, pairing_non_edges,
};
use kuramoto_core::stability::{
    centroid_singleton_cut, classify, cut_cosine_sum, find_unstable_cut, min_cut_sum, CutSearch,
    FIXED_POINT_GATE,
};
use kuramoto_core::{FixedPoint, Network, PhaseState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Command, CutMode, NetworkSpec, OmegaSpec, RunConfig, ScanMode, ThetaSpec};
use crate::render::render_circle_diagram;
use crate::{fmt_sig, CliError};

type CliResult<T> = Result<T, CliError>;

/// Executes one subcommand. Reports go to `stdout`; data files go to `--out`
/// when given.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    match cfg.command {
        Command::Solve => solve(cfg, stdout),
        Command::Integrate => integrate(cfg, stdout),
        Command::Certify => certify(cfg, stdout),
        Command::Scan => scan(cfg, stdout),
        Command::Conj51 => conj51(cfg, stdout),
        Command::Draw => draw(cfg, stdout),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| {
        CliError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn build_network(cfg: &RunConfig) -> CliResult<Network> {
    let spec = cfg
        .network
        .as_ref()
        .ok_or_else(|| CliError::Usage("--network is required for this command".into()))?;
    Ok(match spec {
        NetworkSpec::Complete { n } => complete_network(*n)?,
        NetworkSpec::Cycle { n } => cycle_network(*n)?,
        NetworkSpec::Circulant { n, offsets } => circulant_network(*n, offsets)?,
        NetworkSpec::File(path) => load_edge_list(&read_file(path)?)?,
    })
}

fn build_omega(cfg: &RunConfig, n: usize) -> CliResult<Vec<f64>> {
    let omega = match &cfg.omega {
        OmegaSpec::Zero => vec![0.0; n],
        OmegaSpec::Const(c) => vec![*c; n],
        OmegaSpec::File(path) => phases_from_csv(&read_file(path)?)?,
    };
    if omega.len() != n {
        return Err(CliError::Input(format!(
            "omega has {} entries for {n} nodes",
            omega.len()
        )));
    }
    Ok(omega)
}

fn build_theta(cfg: &RunConfig, n: usize) -> CliResult<Vec<f64>> {
    let theta = match &cfg.theta {
        ThetaSpec::File(path) => phases_from_csv(&read_file(path)?)?,
        ThetaSpec::Twist(q) => twisted_state(n, *q),
        ThetaSpec::Random => random_phases(&mut ChaCha8Rng::seed_from_u64(cfg.seed), n),
    };
    if theta.len() != n {
        return Err(CliError::Input(format!(
            "theta has {} entries for {n} nodes",
            theta.len()
        )));
    }
    Ok(theta)
}

fn build_state(cfg: &RunConfig, net: &Network) -> CliResult<PhaseState> {
    let n = net.n();
    Ok(PhaseState::new(
        build_theta(cfg, n)?,
        build_omega(cfg, n)?,
        cfg.k,
    )?)
}

/// Uses the given phases as they are when they already solve the fixed-point
/// equations, and as a Newton start otherwise.
fn fixed_point(cfg: &RunConfig, net: &Network, state: &PhaseState) -> CliResult<FixedPoint> {
    let direct = FixedPoint::from_state(net, state)?;
    if direct.residual_norm < FIXED_POINT_GATE {
        return Ok(direct);
    }
    Ok(solve_newton(net, state, cfg.tol, cfg.max_iter)?)
}

fn join_sig(values: &[f64]) -> String {
    values
        .iter()
        .map(|&x| fmt_sig(x))
        .collect::<Vec<_>>()
        .join(",")
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn emit(cfg: &RunConfig, stdout: &mut dyn Write, report: &str) -> CliResult<()> {
    stdout.write_all(report.as_bytes())?;
    if let Some(path) = &cfg.out {
        write_file(path, report)?;
    }
    Ok(())
}

fn solve(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let net = build_network(cfg)?;
    let state = build_state(cfg, &net)?;
    let fp = solve_newton(&net, &state, cfg.tol, cfg.max_iter)?;
    let mut r = String::new();
    let _ = writeln!(r, "n: {}", net.n());
    let _ = writeln!(r, "k: {}", fmt_sig(cfg.k));
    let _ = writeln!(r, "iterations: {}", fp.iterations);
    let _ = writeln!(r, "residual_norm: {}", fmt_sig(fp.residual_norm));
    let _ = writeln!(r, "homogeneous: {}", fp.homogeneous);
    let _ = writeln!(r, "grounded_node: {}", fp.grounded_node);
    let _ = writeln!(r, "theta: {}", join_sig(&fp.theta));
    stdout.write_all(r.as_bytes())?;
    if let Some(path) = &cfg.out {
        write_file(path, &fp.to_csv_line())?;
    }
    Ok(())
}

fn integrate(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let net = build_network(cfg)?;
    let state = build_state(cfg, &net)?;
    let h = cfg.h.unwrap_or_else(|| default_step(&net, cfg.k));
    let csv = integrate_rk4(&net, &state, h, cfg.steps, cfg.record_every)?.to_csv();
    match &cfg.out {
        Some(path) => write_file(path, &csv),
        None => Ok(stdout.write_all(csv.as_bytes())?),
    }
}

fn certify(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let net = build_network(cfg)?;
    let state = build_state(cfg, &net)?;
    let fp = fixed_point(cfg, &net, &state)?;
    let rep = classify(&net, cfg.k, &fp)?;

    let mut r = String::new();
    let _ = writeln!(r, "n: {}", net.n());
    let _ = writeln!(r, "k: {}", fmt_sig(cfg.k));
    let _ = writeln!(r, "residual_norm: {}", fmt_sig(fp.residual_norm));
    let _ = writeln!(r, "theta: {}", join_sig(&fp.theta));
    let _ = writeln!(r, "classification: {}", rep.classification);
    let _ = writeln!(r, "zero_modes: {}", rep.zero_modes);
    let _ = writeln!(r, "tau: {}", fmt_sig(rep.tau));
    let _ = writeln!(r, "eigenvalues: {}", join_sig(&rep.eigenvalues));

    let cut = match (&cfg.subset, cfg.cut_search) {
        (Some(subset), _) => {
            let _ = writeln!(r, "cut_search: given");
            Some(cut_cosine_sum(&net, &fp, subset)?)
        }
        (None, CutMode::Exhaustive) => {
            let _ = writeln!(r, "cut_search: exhaustive");
            Some(min_cut_sum(&net, &fp.theta)?)
        }
        (None, CutMode::Heuristic) => {
            let _ = writeln!(r, "cut_search: heuristic");
            find_unstable_cut(&net, &fp, CutSearch::Heuristic { seed: cfg.seed })?
        }
    };
    match cut {
        Some(c) => {
            let _ = writeln!(r, "cut_subset: {}", join_ids(&c.subset));
            let _ = writeln!(r, "cut_sum: {}", fmt_sig(c.cut_sum));
            let _ = writeln!(r, "certifies_instability: {}", c.certifies_instability);
        }
        None => {
            let _ = writeln!(r, "cut_subset: none");
            let _ = writeln!(r, "cut_sum: none");
            let _ = writeln!(r, "certifies_instability: false");
        }
    }
    // the centroid construction only applies to non-zero points on near-complete graphs
    if let Ok(c) = centroid_singleton_cut(&net, &fp) {
        let _ = writeln!(r, "centroid_node: {}", c.node);
        let _ = writeln!(r, "centroid_cut_sum: {}", fmt_sig(c.cut_sum));
        let _ = writeln!(r, "centroid_magnitude: {}", fmt_sig(c.centroid_magnitude));
    }
    emit(cfg, stdout, &r)
}

fn required_n(cfg: &RunConfig) -> CliResult<usize> {
    cfg.n
        .ok_or_else(|| CliError::Usage("--n is required for this command".into()))
}

fn scan(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let n = required_n(cfg)?;
    let mode = match cfg.scan_mode {
        ScanMode::Complete => DegreeMode::Complete,
        ScanMode::NearComplete => DegreeMode::CompleteMinus(
            cfg.non_edges
                .clone()
                .unwrap_or_else(|| pairing_non_edges(n)),
        ),
    };
    let report = theorem51_harness(n, &mode, cfg.trials, cfg.seed)?;
    emit(cfg, stdout, &report.to_text())
}

fn conj51(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let n = required_n(cfg)?;
    let mut r = String::new();
    match cfg.n_max {
        Some(n_max) => {
            if n_max < n {
                return Err(CliError::Usage(format!("--n-max {n_max} is below --n {n}")));
            }
            let _ = writeln!(r, "{}", ThresholdRow::CSV_HEADER);
            for m in n..=n_max {
                let _ = writeln!(r, "{}", conjecture51_r(m)?.to_csv());
            }
        }
        None => {
            let row = conjecture51_r(n)?;
            let _ = writeln!(r, "n: {}", row.n);
            let _ = writeln!(r, "r: {}", row.r);
            let _ = writeln!(r, "ratio: {}", fmt_sig(row.ratio));
            let _ = writeln!(r, "sum_before: {}", fmt_sig(row.sum_before));
            let _ = writeln!(r, "sum_at_r: {}", fmt_sig(row.sum_at_r));
            if n % 2 == 0 && n >= 4 {
                let _ = writeln!(
                    r,
                    "half_cut_at_r: {}",
                    fmt_sig(conjecture51_half_cut(n, row.r)?)
                );
                if row.r > 1 {
                    let _ = writeln!(
                        r,
                        "half_cut_below_r: {}",
                        fmt_sig(conjecture51_half_cut(n, row.r - 1)?)
                    );
                }
            }
        }
    }
    emit(cfg, stdout, &r)
}

fn draw(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let net = build_network(cfg)?;
    let theta = build_theta(cfg, net.n())?;
    let svg = render_circle_diagram(&net, &theta)?;
    match &cfg.out {
        Some(path) => write_file(path, &svg),
        None => Ok(stdout.write_all(svg.as_bytes())?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_args;

    fn run_args(args: &[&str]) -> CliResult<String> {
        let mut argv = vec!["kuramoto"];
        argv.extend_from_slice(args);
        let cfg = parse_args(argv)?;
        let mut out = Vec::new();
        run(&cfg, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    fn field<'a>(report: &'a str, key: &str) -> &'a str {
        report
            .lines()
            .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix(": ")))
            .unwrap_or_else(|| panic!("{key} missing from\n{report}"))
    }

    #[test]
    fn certify_triangle() {
        let out = run_args(&[
            "certify",
            "--network",
            "complete",
            "--n",
            "3",
            "--twist",
            "1",
        ])
        .unwrap();
        assert_eq!(field(&out, "classification"), "unstable");
        assert_eq!(field(&out, "cut_sum"), "-1");
        assert_eq!(field(&out, "certifies_instability"), "true");
        assert_eq!(field(&out, "centroid_cut_sum"), "-1");
    }

    #[test]
    fn certify_eight_node_given_subset() {
        let out = run_args(&[
            "certify",
            "--network",
            "circulant",
            "--n",
            "8",
            "--offsets",
            "1,4",
            "--twist",
            "1",
            "--subset",
            "2,3,4,5",
        ])
        .unwrap();
        assert_eq!(field(&out, "classification"), "unstable");
        assert_eq!(field(&out, "cut_sum"), fmt_sig(2f64.sqrt() - 4.0));
        assert!(!out.contains("centroid"));
    }

    #[test]
    fn certify_hexagon_is_stable() {
        let out = run_args(&["certify", "--network", "cycle", "--n", "6", "--twist", "1"]).unwrap();
        assert_eq!(field(&out, "classification"), "stable");
        assert_eq!(field(&out, "certifies_instability"), "false");
        let heur = run_args(&[
            "certify",
            "--network",
            "cycle",
            "--n",
            "6",
            "--twist",
            "1",
            "--cut-search",
            "heuristic",
        ])
        .unwrap();
        assert_eq!(field(&heur, "cut_sum"), "none");
    }

    #[test]
    fn conj51_single_and_table() {
        let out = run_args(&["conj51", "--n", "10"]).unwrap();
        assert_eq!(field(&out, "r"), "4");
        assert_eq!(field(&out, "ratio"), "0.8");
        assert!(field(&out, "half_cut_at_r").starts_with('-'));
        let table = run_args(&["conj51", "--n", "6", "--n-max", "10"]).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "n,r,ratio");
        assert_eq!(lines[1], "6,2,0.666666666667");
        assert_eq!(lines[5], "10,4,0.800000000000");
        assert!(matches!(
            run_args(&["conj51", "--n", "6", "--n-max", "5"]),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn solve_and_integrate() {
        let out = run_args(&["solve", "--network", "complete", "--n", "4", "--seed", "3"]).unwrap();
        let res: f64 = field(&out, "residual_norm").parse().unwrap();
        assert!(res < 1e-12);
        let csv = run_args(&[
            "integrate",
            "--network",
            "cycle",
            "--n",
            "5",
            "--steps",
            "10",
            "--record-every",
            "5",
            "--h",
            "0.01",
        ])
        .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,theta_0,theta_1,theta_2,theta_3,theta_4");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn error_classes() {
        assert!(matches!(run_args(&["solve"]), Err(CliError::Usage(_))));
        assert!(matches!(
            run_args(&[
                "solve",
                "--network",
                "circulant",
                "--n",
                "6",
                "--offsets",
                "4"
            ]),
            Err(CliError::Input(_))
        ));
        let e = run_args(&[
            "solve",
            "--network",
            "complete",
            "--n",
            "5",
            "--max-iter",
            "0",
        ])
        .unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
