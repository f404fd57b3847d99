//! Command-line front end: argument and config-file handling, the subcommand
//! dispatcher, and the SVG circle-diagram renderer.

// guards written as `!(x > 0.0)` deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod render;

pub use commands::run;
pub use config::{parse_args, RunConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// `1` for solver failures, `2` for bad input or usage, `0` for `--help`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Clap(e) => e.exit_code(),
            Self::Usage(_) | Self::Input(_) | Self::Io(_) => 2,
            Self::Solver(_) => 1,
        }
    }
}

impl From<kuramoto_core::Error> for CliError {
    fn from(e: kuramoto_core::Error) -> Self {
        use kuramoto_core::Error as E;
        match e {
            E::SolverSingular { .. } | E::NoConvergence { .. } => Self::Solver(e.to_string()),
            other => Self::Input(other.to_string()),
        }
    }
}

/// Twelve significant digits, `%g` style: fixed notation for moderate
/// magnitudes, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
