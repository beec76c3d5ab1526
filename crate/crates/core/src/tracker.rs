//! High-order reference solution carried on the controller's nodes, with a
//! running estimate of its own global error.
//!
//! The local error of each reference step is estimated by Richardson
//! extrapolation (one full step against two half steps) and accumulated with
//! the linearised recursion `delta_{i+1} = eps_{i+1} + M_i delta_i`, where
//! `M_i` is either the Jacobian of the discrete step map or its first-order
//! approximation `I + h f_y`.

use crate::problem::HamiltonianProblem;
use crate::tableau::ButcherTableau;
use crate::{max_norm, Mat2, Result, StateVector, Vec2};

pub const DEFAULT_GUARD_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub y8: StateVector,
    /// Accumulated global error estimate of `y8`.
    pub delta8: Vec2,
    /// Local error estimate of the most recent step.
    pub eps8_last: Vec2,
}

impl ReferenceState {
    pub fn new(y0: StateVector) -> Self {
        Self {
            y8: y0,
            delta8: [0.0; 2],
            eps8_last: [0.0; 2],
        }
    }
}

/// How the accumulated error is carried from one node to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagator {
    /// Exact Jacobian of the reference method's step map.
    #[default]
    StepJacobian,
    /// `I + h f_y` with `f_y` the problem Jacobian at the start of the step.
    ProblemJacobian,
}

/// Which of the two Richardson results becomes the next reference state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeepPolicy {
    /// Keep the two half steps; `eps` estimates their combined local error.
    #[default]
    HalfSteps,
    /// Keep the single full step; `eps` estimates its local error.
    FullStep,
}

/// One reference step of size `h` with a Richardson estimate of its local error.
///
/// With `y_full` one step of size `h` and `y_half` two steps of size `h/2`,
/// the local error of `y_full` is `(y_full - y_half) 2^z / (2^z - 1)` and that
/// of `y_half` is `(y_full - y_half) / (2^z - 1)`, `z` being the declared
/// order. Errors are signed as numerical minus exact. Returns the kept state
/// and the error estimate belonging to it.
pub fn reference_step<F>(
    method: &ButcherTableau,
    rhs: &F,
    t: f64,
    y: &[f64],
    h: f64,
    policy: KeepPolicy,
) -> Result<(StateVector, StateVector)>
where
    F: Fn(f64, &[f64]) -> StateVector + ?Sized,
{
    let y_full = method.rk_step(rhs, t, y, h)?;
    let half = 0.5 * h;
    let y_mid = method.rk_step(rhs, t, y, half)?;
    let y_half = method.rk_step(rhs, t + half, &y_mid, half)?;
    Ok(richardson(method, policy, y_full, y_half))
}

fn richardson(
    method: &ButcherTableau,
    policy: KeepPolicy,
    y_full: StateVector,
    y_half: StateVector,
) -> (StateVector, StateVector) {
    let scale = 2f64.powi(method.declared_order() as i32);
    let factor = match policy {
        KeepPolicy::HalfSteps => 1.0 / (scale - 1.0),
        KeepPolicy::FullStep => scale / (scale - 1.0),
    };
    let eps = y_full
        .iter()
        .zip(&y_half)
        .map(|(f, hh)| (f - hh) * factor)
        .collect();
    let kept = match policy {
        KeepPolicy::HalfSteps => y_half,
        KeepPolicy::FullStep => y_full,
    };
    (kept, eps)
}

fn mat2(m: &[f64]) -> Mat2 {
    [[m[0], m[1]], [m[2], m[3]]]
}

fn mat2_mul(a: Mat2, b: Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// `eps + (I + h jac) delta_prev`.
pub fn propagate_global_error(delta_prev: Vec2, eps: Vec2, h: f64, jac: Mat2) -> Vec2 {
    let [d0, d1] = delta_prev;
    [
        eps[0] + d0 + h * (jac[0][0] * d0 + jac[0][1] * d1),
        eps[1] + d1 + h * (jac[1][0] * d0 + jac[1][1] * d1),
    ]
}

/// `eps + step_jac delta_prev`, with `step_jac` the Jacobian of the step map.
pub fn propagate_with_step_jacobian(delta_prev: Vec2, eps: Vec2, step_jac: Mat2) -> Vec2 {
    let [d0, d1] = delta_prev;
    [
        eps[0] + step_jac[0][0] * d0 + step_jac[0][1] * d1,
        eps[1] + step_jac[1][0] * d0 + step_jac[1][1] * d1,
    ]
}

/// True when the reference error estimate is small enough, `|delta8|_inf <= margin * delta`,
/// that it cannot influence quench decisions.
pub fn reference_error_guard(delta8: Vec2, delta: f64, margin: f64) -> bool {
    max_norm(&delta8) <= margin * delta
}

/// Advances a [`ReferenceState`] over caller-supplied steps.
#[derive(Debug, Clone)]
pub struct Tracker {
    method: ButcherTableau,
    propagator: Propagator,
    policy: KeepPolicy,
}

impl Tracker {
    pub fn new(method: ButcherTableau, propagator: Propagator, policy: KeepPolicy) -> Self {
        Self {
            method,
            propagator,
            policy,
        }
    }

    pub fn method(&self) -> &ButcherTableau {
        &self.method
    }

    pub fn propagator(&self) -> Propagator {
        self.propagator
    }

    pub fn policy(&self) -> KeepPolicy {
        self.policy
    }

    /// Steps the reference over `[t, t + h]` and updates its error estimate.
    pub fn advance(
        &self,
        state: &mut ReferenceState,
        problem: &HamiltonianProblem,
        t: f64,
        h: f64,
    ) -> Result<()> {
        let rhs = &*problem.ivp.rhs;
        let jac = problem.ivp.jacobian_fn();
        let y = &state.y8;
        let half = 0.5 * h;

        let (y_next, eps, delta8) = match self.propagator {
            Propagator::StepJacobian => {
                let (y_full, m_full) = self.method.rk_step_with_jacobian(rhs, &jac, t, y, h)?;
                let (y_mid, m1) = self.method.rk_step_with_jacobian(rhs, &jac, t, y, half)?;
                let (y_half, m2) =
                    self.method
                        .rk_step_with_jacobian(rhs, &jac, t + half, &y_mid, half)?;
                let step_jac = match self.policy {
                    KeepPolicy::FullStep => mat2(&m_full),
                    KeepPolicy::HalfSteps => mat2_mul(mat2(&m2), mat2(&m1)),
                };
                let (kept, eps) = richardson(&self.method, self.policy, y_full, y_half);
                let eps = [eps[0], eps[1]];
                let delta = propagate_with_step_jacobian(state.delta8, eps, step_jac);
                (kept, eps, delta)
            }
            Propagator::ProblemJacobian => {
                let j = problem.jacobian2(t, y);
                let (kept, eps) = reference_step(&self.method, rhs, t, y, h, self.policy)?;
                let eps = [eps[0], eps[1]];
                let delta = propagate_global_error(state.delta8, eps, h, j);
                (kept, eps, delta)
            }
        };
        state.y8 = y_next;
        state.eps8_last = eps;
        state.delta8 = delta8;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::harmonic_problem;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_and_constant_rhs() {
        let rk8 = ButcherTableau::cooper_verner8();
        let zero = |_t: f64, _y: &[f64]| vec![0.0, 0.0];
        let (y, eps) =
            reference_step(&rk8, &zero, 0.0, &[0.7, -0.1], 0.05, KeepPolicy::HalfSteps).unwrap();
        assert_eq!(y, vec![0.7, -0.1]);
        assert_eq!(eps, vec![0.0, 0.0]);

        let constant = |_t: f64, _y: &[f64]| vec![0.25, -0.5];
        let (_, eps) =
            reference_step(&rk8, &constant, 0.0, &[0.0, 0.0], 0.5, KeepPolicy::FullStep).unwrap();
        assert_eq!(eps, vec![0.0, 0.0]);
    }

    /// Rotation by angle `h`, the exact harmonic flow, evaluated from its
    /// Taylor series with compensated summation so it is accurate well below
    /// the local errors being compared.
    fn exact_rotation(h: f64) -> [f64; 2] {
        let (mut cos, mut cos_c) = (0.0_f64, 0.0_f64);
        let (mut sin, mut sin_c) = (0.0_f64, 0.0_f64);
        let mut term = 1.0_f64;
        for k in 0..40u32 {
            let (sum, comp, sign) = if k % 2 == 0 {
                (&mut cos, &mut cos_c, if k % 4 == 0 { 1.0 } else { -1.0 })
            } else {
                (&mut sin, &mut sin_c, if k % 4 == 1 { 1.0 } else { -1.0 })
            };
            let y = sign * term - *comp;
            let t = *sum + y;
            *comp = (t - *sum) - y;
            *sum = t;
            term *= h / (k as f64 + 1.0);
        }
        // (q, p) = (cos h, -sin h) from (1, 0)
        [cos, -sin]
    }

    #[test]
    fn richardson_estimate_matches_true_local_error() {
        let rk8 = ButcherTableau::cooper_verner8();
        let prob = harmonic_problem();
        let rhs = &*prob.ivp.rhs;

        // At h = 0.05 only the p component's local error (~5e-17) sits above
        // the rounding level of q ~ 1.
        let h = 0.05;
        let (y_full, eps) =
            reference_step(&rk8, rhs, 0.0, &[1.0, 0.0], h, KeepPolicy::FullStep).unwrap();
        let exact = exact_rotation(h);
        let true_p = y_full[1] - exact[1];
        let ratio = eps[1] / true_p;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "eps {} true {}",
            eps[1],
            true_p
        );

        // Larger steps put both components well above rounding.
        for h in [0.2, 0.4] {
            let (y_full, eps) =
                reference_step(&rk8, rhs, 0.0, &[1.0, 0.0], h, KeepPolicy::FullStep).unwrap();
            let exact = exact_rotation(h);
            let true_err = [y_full[0] - exact[0], y_full[1] - exact[1]];
            let ratio = max_norm(&eps) / max_norm(&true_err);
            assert!((0.5..=2.0).contains(&ratio), "h {h}: ratio {ratio}");
            assert!(eps[1].signum() == true_err[1].signum());
        }
    }

    #[test]
    fn half_step_estimate_matches_its_own_error() {
        let rk8 = ButcherTableau::cooper_verner8();
        let prob = harmonic_problem();
        let rhs = &*prob.ivp.rhs;
        for h in [0.4, 0.8] {
            let (y_half, eps) =
                reference_step(&rk8, rhs, 0.0, &[1.0, 0.0], h, KeepPolicy::HalfSteps).unwrap();
            let exact = exact_rotation(h);
            let true_err = [y_half[0] - exact[0], y_half[1] - exact[1]];
            let ratio = max_norm(&eps) / max_norm(&true_err);
            assert!((0.5..=2.0).contains(&ratio), "h {h}: ratio {ratio}");
        }
    }

    #[test]
    fn local_error_scales_as_h9() {
        let rk8 = ButcherTableau::cooper_verner8();
        let prob = harmonic_problem();
        let rhs = &*prob.ivp.rhs;
        let norm = |h: f64| {
            max_norm(
                &reference_step(&rk8, rhs, 0.0, &[1.0, 0.0], h, KeepPolicy::FullStep)
                    .unwrap()
                    .1,
            )
        };
        for h in [0.4, 0.2] {
            let ratio = norm(h) / norm(h / 2.0);
            let expected = 2f64.powi(9);
            assert!(
                (ratio / expected - 1.0).abs() <= 0.2,
                "h {h}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn propagation_examples() {
        assert_eq!(
            propagate_global_error([0.0, 0.0], [3e-12, -1e-12], 0.05, [[1.0, 2.0], [3.0, 4.0]]),
            [3e-12, -1e-12]
        );
        assert_eq!(
            propagate_global_error([1e-9, 2e-9], [1e-12, 0.0], 0.05, [[0.0; 2]; 2]),
            [1e-9 + 1e-12, 2e-9]
        );
        let out = propagate_global_error([1e-9, 0.0], [0.0, 0.0], 0.05, [[0.0, 1.0], [-1.0, 0.0]]);
        assert_relative_eq!(out[0], 1e-9, max_relative = 1e-15);
        assert_relative_eq!(out[1], -5e-11, max_relative = 1e-15);
    }

    #[test]
    fn guard_examples() {
        assert!(reference_error_guard(
            [1.86e-12, 1e-12],
            1e-6,
            DEFAULT_GUARD_MARGIN
        ));
        assert!(reference_error_guard(
            [0.0, 0.0],
            1e-9,
            DEFAULT_GUARD_MARGIN
        ));
        assert!(!reference_error_guard([2e-9, 0.0], 1e-6, 1e-3));
    }

    #[test]
    fn tracker_matches_true_error_on_harmonic_oscillator() {
        let prob = harmonic_problem();
        let exact = prob.ivp.exact_solution.clone().unwrap();
        let tracker = Tracker::new(
            ButcherTableau::cooper_verner8(),
            Propagator::StepJacobian,
            KeepPolicy::FullStep,
        );
        let mut state = ReferenceState::new(prob.ivp.y0.clone());
        let h = 0.05;
        for n in 0..2000 {
            tracker.advance(&mut state, &prob, n as f64 * h, h).unwrap();
        }
        let e = exact(100.0);
        let true_err = [state.y8[0] - e[0], state.y8[1] - e[1]];
        let ratio = max_norm(&state.delta8) / max_norm(&true_err);
        assert!((1.0 / 3.0..=3.0).contains(&ratio), "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn propagation_is_linear(
            d0 in -1e-6..1e-6f64, d1 in -1e-6..1e-6f64,
            e0 in -1e-9..1e-9f64, e1 in -1e-9..1e-9f64,
            h in 1e-3..0.5f64, j in proptest::array::uniform4(-3.0..3.0f64),
        ) {
            let jac = [[j[0], j[1]], [j[2], j[3]]];
            let once = propagate_global_error([d0, d1], [e0, e1], h, jac);
            let twice = propagate_global_error([2.0 * d0, 2.0 * d1], [2.0 * e0, 2.0 * e1], h, jac);
            // Scaling by two is exact in binary floating point.
            prop_assert_eq!(twice, [2.0 * once[0], 2.0 * once[1]]);
        }
    }
}
