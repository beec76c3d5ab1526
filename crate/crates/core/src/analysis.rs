//! Post-run diagnostics: Hamiltonian error against its first-order bound and
//! the phase-space trajectory error.
//!
//! The exact solution is not available, so the reference solution stands in
//! for it. This is sound as long as the reference's own error estimate stays
//! far below the tolerance (see [`crate::tracker::reference_error_guard`]).

use crate::engine::Trajectory;
use crate::max_norm;
use crate::problem::HamiltonianProblem;

/// Slack constant for the dropped second-order terms of the Hamiltonian bound.
pub const SECOND_ORDER_SLACK: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    /// `|H(y34) - H(p0, q0)|` per node.
    pub hamiltonian_error: Vec<f64>,
    /// `(|q'| + |p'|) delta` at the reference state, per node.
    pub hamiltonian_bound: Vec<f64>,
    /// `|y34 - y8|_2` per node.
    pub trajectory_error: Vec<f64>,
    pub max_trajectory_error: f64,
    pub max_hamiltonian_error: f64,
    /// Largest componentwise `|y34 - y8|`.
    pub max_componentwise_error: [f64; 2],
    /// Nodes where `|H(y34) - H(y8)| > (|q'| + |p'|) e + 100 e^2` with
    /// `e = |y34 - y8|_inf`.
    pub bound_violations: usize,
}

/// `(|dq/dt| + |dp/dt|) delta` evaluated at `y8`.
pub fn hamiltonian_bound(problem: &HamiltonianProblem, y8: &[f64], delta: f64) -> f64 {
    let f = problem.rhs(0.0, y8);
    (f[0].abs() + f[1].abs()) * delta
}

/// Euclidean distance in phase space.
pub fn trajectory_error(y34: &[f64], y8: &[f64]) -> f64 {
    y34.iter()
        .zip(y8)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Whether the Hamiltonian difference between two nearby states respects the
/// first-order bound plus second-order slack.
pub fn hamiltonian_bound_holds(problem: &HamiltonianProblem, y34: &[f64], y8: &[f64]) -> bool {
    let diff: Vec<f64> = y34.iter().zip(y8).map(|(a, b)| a - b).collect();
    let e = max_norm(&diff);
    let dh = (problem.energy(y34) - problem.energy(y8)).abs();
    dh <= hamiltonian_bound(problem, y8, e) + SECOND_ORDER_SLACK * e * e
}

/// Computes the per-node series. `deltas` holds the tolerance at each node
/// (same length as the trajectory).
pub fn diagnose(
    traj: &Trajectory,
    problem: &HamiltonianProblem,
    deltas: &[f64],
) -> DiagnosticsReport {
    assert_eq!(deltas.len(), traj.nodes.len(), "one tolerance per node");
    let mut report = DiagnosticsReport {
        hamiltonian_error: Vec::with_capacity(deltas.len()),
        hamiltonian_bound: Vec::with_capacity(deltas.len()),
        trajectory_error: Vec::with_capacity(deltas.len()),
        max_trajectory_error: 0.0,
        max_hamiltonian_error: 0.0,
        max_componentwise_error: [0.0; 2],
        bound_violations: 0,
    };
    for (node, &delta) in traj.nodes.iter().zip(deltas) {
        let h_err = problem.eval_hamiltonian_error(&node.y34);
        let traj_err = trajectory_error(&node.y34, &node.y8);
        report.hamiltonian_error.push(h_err);
        report
            .hamiltonian_bound
            .push(hamiltonian_bound(problem, &node.y8, delta));
        report.trajectory_error.push(traj_err);
        report.max_hamiltonian_error = report.max_hamiltonian_error.max(h_err);
        report.max_trajectory_error = report.max_trajectory_error.max(traj_err);
        for k in 0..2 {
            report.max_componentwise_error[k] =
                report.max_componentwise_error[k].max((node.y34[k] - node.y8[k]).abs());
        }
        if !hamiltonian_bound_holds(problem, &node.y34, &node.y8) {
            report.bound_violations += 1;
        }
    }
    report
}

/// [`diagnose`] with the per-node tolerances recorded in the trajectory.
pub fn diagnose_recorded(traj: &Trajectory, problem: &HamiltonianProblem) -> DiagnosticsReport {
    let deltas: Vec<f64> = traj.nodes.iter().map(|n| n.tolerance).collect();
    diagnose(traj, problem, &deltas)
}
