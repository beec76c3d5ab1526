//! Explicit Runge-Kutta integration with stepwise global error control.
//!
//! The working solution is advanced by a third/fourth order pair using local
//! extrapolation. An eighth-order reference solution is carried on the same
//! nodes, and whenever the working solution drifts further than the tolerance
//! from it, the working state is *quenched*: replaced by the reference state.
//!
//! ```
//! use rkq::{engine, problem, controller::ToleranceSpec};
//!
//! let prob = problem::harmonic_problem();
//! let config = engine::RunConfig::new(1.0, ToleranceSpec::absolute(1e-6).unwrap());
//! let traj = engine::integrate(&prob, &config).unwrap();
//! assert!(traj.summary.max_gerr.iter().all(|&e| e <= 1e-6));
//! ```

pub mod analysis;
pub mod controller;
pub mod engine;
pub mod error;
pub mod problem;
pub mod tableau;
pub mod tracker;

pub use error::{Error, Result};

/// State of a first-order system. For Hamiltonian problems the ordering is `(q, p)`.
pub type StateVector = Vec<f64>;

/// Two-component vector used for per-component error quantities of a `(q, p)` pair.
pub type Vec2 = [f64; 2];

/// Row-major 2x2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
