//! Command-line flags, the optional `key=value` config file, and their
//! resolution into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "kuramoto",
    version,
    about = "Fixed points, stability and cut certificates for the network Kuramoto model",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve for a frequency fixed point with damped Newton.
    Solve,
    /// Integrate the dynamics with fixed-step RK4 and write the trajectory as CSV.
    Integrate,
    /// Classify a fixed point and search for a non-positive cut.
    Certify,
    /// Random-start survey of fixed points on near-complete graphs.
    Scan,
    /// Degree threshold r(n) for the half-circle cut.
    Conj51,
    /// Draw a circle diagram as SVG.
    Draw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetworkKind {
    Complete,
    Cycle,
    Circulant,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanMode {
    Complete,
    NearComplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutMode {
    Exhaustive,
    Heuristic,
}

/// Flags shared by every subcommand. All are optional here; defaults are
/// applied in [`RunConfig::resolve`].
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value file supplying defaults for any flag below.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub network: Option<NetworkKind>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Circulant offsets, comma separated.
    #[arg(long, global = true, value_name = "LIST")]
    pub offsets: Option<String>,
    /// Edge-list file for --network file.
    #[arg(long, global = true, value_name = "PATH")]
    pub edges: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// zero | const:<v> | file:<path>
    #[arg(long, global = true, value_name = "SPEC")]
    pub omega: Option<String>,
    /// Phase CSV file.
    #[arg(long, global = true, value_name = "PATH")]
    pub theta: Option<PathBuf>,
    /// Use the twisted state with this winding number as phases.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub twist: Option<i64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// RK4 step size; defaults to 0.01/(k d_max).
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long = "record-every", global = true)]
    pub record_every: Option<usize>,
    #[arg(long = "cut-search", global = true, value_enum)]
    pub cut_search: Option<CutMode>,
    /// Explicit node subset A for certify, comma separated.
    #[arg(long, global = true, value_name = "LIST")]
    pub subset: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ScanMode>,
    /// Non-edges for near-complete scans, as "a-b,c-d".
    #[arg(long = "non-edges", global = true, value_name = "LIST")]
    pub non_edges: Option<String>,
    /// Tabulate conj51 from --n up to this size.
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Complete { n: usize },
    Cycle { n: usize },
    Circulant { n: usize, offsets: Vec<usize> },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaSpec {
    Zero,
    Const(f64),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSpec {
    File(PathBuf),
    Twist(i64),
    /// Uniform random phases drawn with the run seed.
    Random,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub network: Option<NetworkSpec>,
    pub n: Option<usize>,
    pub omega: OmegaSpec,
    pub k: f64,
    pub theta: ThetaSpec,
    pub seed: u64,
    pub trials: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub h: Option<f64>,
    pub steps: usize,
    pub record_every: usize,
    pub cut_search: CutMode,
    pub subset: Option<Vec<usize>>,
    pub scan_mode: ScanMode,
    pub non_edges: Option<Vec<(usize, usize)>>,
    pub n_max: Option<usize>,
    pub out: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, b) = pair.split_once('-').ok_or_else(|| {
                CliError::Usage(format!("--non-edges: expected a-b, got {pair:?}"))
            })?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("--non-edges: bad node id {x:?}")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

fn parse_omega(text: &str) -> Result<OmegaSpec, CliError> {
    if text == "zero" {
        return Ok(OmegaSpec::Zero);
    }
    if let Some(v) = text.strip_prefix("const:") {
        return v
            .parse()
            .map(OmegaSpec::Const)
            .map_err(|_| CliError::Usage(format!("--omega: bad constant {v:?}")));
    }
    if let Some(p) = text.strip_prefix("file:") {
        return Ok(OmegaSpec::File(PathBuf::from(p)));
    }
    Err(CliError::Usage(format!(
        "--omega must be zero, const:<v> or file:<path>, got {text:?}"
    )))
}

impl RunConfig {
    /// Applies defaults and validates cross-flag requirements.
    pub fn resolve(command: Command, f: Flags) -> Result<Self, CliError> {
        let network = match f.network {
            None => None,
            Some(kind) => {
                let need_n = || {
                    f.n.ok_or_else(|| CliError::Usage("--n is required for this network".into()))
                };
                Some(match kind {
                    NetworkKind::Complete => NetworkSpec::Complete { n: need_n()? },
                    NetworkKind::Cycle => NetworkSpec::Cycle { n: need_n()? },
                    NetworkKind::Circulant => {
                        let offsets = f.offsets.as_deref().ok_or_else(|| {
                            CliError::Usage("--offsets is required for circulant".into())
                        })?;
                        NetworkSpec::Circulant {
                            n: need_n()?,
                            offsets: parse_list("offsets", offsets)?,
                        }
                    }
                    NetworkKind::File => {
                        NetworkSpec::File(f.edges.clone().ok_or_else(|| {
                            CliError::Usage("--edges is required for file".into())
                        })?)
                    }
                })
            }
        };
        let theta = match (f.theta, f.twist) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "--theta and --twist are mutually exclusive".into(),
                ))
            }
            (Some(p), None) => ThetaSpec::File(p),
            (None, Some(q)) => ThetaSpec::Twist(q),
            (None, None) => ThetaSpec::Random,
        };
        let k = f.k.unwrap_or(1.0);
        if !(k > 0.0) {
            return Err(CliError::Usage(format!("--k must be positive, got {k}")));
        }
        Ok(Self {
            command,
            network,
            n: f.n,
            omega: f
                .omega
                .as_deref()
                .map(parse_omega)
                .transpose()?
                .unwrap_or(OmegaSpec::Zero),
            k,
            theta,
            seed: f.seed.unwrap_or(0),
            trials: f.trials.unwrap_or(1000),
            tol: f.tol.unwrap_or(kuramoto_core::fixpoint::DEFAULT_TOL),
            max_iter: f
                .max_iter
                .unwrap_or(kuramoto_core::fixpoint::DEFAULT_MAX_ITER),
            h: f.h,
            steps: f.steps.unwrap_or(1000),
            record_every: f.record_every.unwrap_or(1),
            cut_search: f.cut_search.unwrap_or(CutMode::Exhaustive),
            subset: f
                .subset
                .as_deref()
                .map(|s| parse_list("subset", s))
                .transpose()?,
            scan_mode: f.mode.unwrap_or(ScanMode::Complete),
            non_edges: f.non_edges.as_deref().map(parse_pairs).transpose()?,
            n_max: f.n_max,
            out: f.out,
        })
    }
}

/// Turns `key=value` lines into `--key=value` arguments. Blank lines and `#`
/// comments are ignored.
pub fn config_file_args(text: &str) -> Result<Vec<String>, CliError> {
    let mut args = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key=value", idx + 1))
        })?;
        let key = key.trim();
        if key == "config" {
            return Err(CliError::Usage(
                "config files cannot include other config files".into(),
            ));
        }
        args.push(format!("--{key}={}", value.trim()));
    }
    Ok(args)
}

/// Parses argv into a [`RunConfig`]. Config-file values are spliced in ahead of
/// the command-line flags, so explicit flags win.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let first = Cli::try_parse_from(&argv)?;
    let merged = match &first.flags.config {
        None => first,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let extra = config_file_args(&text)?;
            let mut full = argv[..1.min(argv.len())].to_vec();
            full.extend(extra);
            full.extend(argv.iter().skip(1).cloned());
            Cli::try_parse_from(&full)?
        }
    };
    RunConfig::resolve(merged.command, merged.flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = parse_args(["kuramoto", "conj51", "--n", "10"]).unwrap();
        assert_eq!(cfg.command, Command::Conj51);
        assert_eq!(cfg.n, Some(10));
        assert_eq!(cfg.k, 1.0);
        assert_eq!(cfg.omega, OmegaSpec::Zero);
        assert_eq!(cfg.theta, ThetaSpec::Random);
        assert_eq!(cfg.tol, 1e-12);
        assert_eq!(cfg.max_iter, 100);
        assert_eq!(cfg.network, None);
    }

    #[test]
    fn network_and_omega_specs() {
        let cfg = parse_args([
            "kuramoto",
            "solve",
            "--network",
            "circulant",
            "--n",
            "8",
            "--offsets",
            "1,4",
            "--omega",
            "const:0.5",
            "--twist",
            "-1",
        ])
        .unwrap();
        assert_eq!(
            cfg.network,
            Some(NetworkSpec::Circulant {
                n: 8,
                offsets: vec![1, 4]
            })
        );
        assert_eq!(cfg.omega, OmegaSpec::Const(0.5));
        assert_eq!(cfg.theta, ThetaSpec::Twist(-1));

        assert!(matches!(
            parse_args(["kuramoto", "solve", "--network", "cycle"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["kuramoto", "solve", "--omega", "sometimes"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["kuramoto", "fly"]),
            Err(CliError::Clap(_))
        ));
        assert!(matches!(parse_args(["kuramoto"]), Err(CliError::Clap(_))));
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# scan batch\nn = 6\nseed=9\nmode=near-complete\nnon-edges=0-1,2-3\n",
        )
        .unwrap();
        let cfg = parse_args([
            "kuramoto".to_string(),
            "scan".into(),
            "--config".into(),
            path.display().to_string(),
            "--seed".into(),
            "4".into(),
        ])
        .unwrap();
        assert_eq!(cfg.n, Some(6));
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.scan_mode, ScanMode::NearComplete);
        assert_eq!(cfg.non_edges, Some(vec![(0, 1), (2, 3)]));

        assert!(config_file_args("justakey\n").is_err());
    }
}
