//! Fixed points of the finite network Kuramoto model.
//!
//! The crate covers the whole pipeline from a graph to a stability verdict:
//!
//! * [`network`] builds simple undirected graphs and reads edge lists,
//! * [`dynamics`] evaluates `dθ_i/dt = ω_i + k Σ_j A_ij sin(θ_j − θ_i)` and integrates it,
//! * [`fixpoint`] solves for frequency fixed points with a grounded damped Newton method,
//! * [`stability`] classifies fixed points from the Jacobian spectrum and searches for
//!   cut certificates (bipartitions with a non-positive cut-cosine sum), which rule out
//!   stability,
//! * [`experiments`] runs the batch checks on near-complete graphs and the
//!   half-circle degree threshold.

// guards written as `!(x > 0.0)` deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fixpoint;
pub mod linalg;
pub mod network;
pub mod stability;

pub use dynamics::{PhaseState, Trajectory};
pub use error::{Error, Result};
pub use fixpoint::FixedPoint;
pub use network::Network;
pub use stability::{Classification, CutCertificate, StabilityReport};
