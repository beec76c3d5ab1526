//! The quenched integration loop.
//!
//! Each accepted step advances the working solution with the RK3/RK4 pair,
//! advances the RK8 reference over the same interval, and compares the two.
//! When quenching is enabled and the difference exceeds the node tolerance,
//! the working state is overwritten with the reference state.

use crate::controller::{self, tolerance_at, ToleranceSpec};
use crate::problem::HamiltonianProblem;
use crate::tableau::ButcherTableau;
use crate::tracker::{self, KeepPolicy, Propagator, ReferenceState, Tracker};
use crate::{max_norm, Error, Result, StateVector, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub tolerance: ToleranceSpec,
    pub h0: f64,
    pub h_min: f64,
    pub quench_enabled: bool,
    /// Limit on accepted steps.
    pub max_steps: usize,
    pub propagator: Propagator,
    pub keep_policy: KeepPolicy,
    pub guard_margin: f64,
}

impl RunConfig {
    pub fn new(t_end: f64, tolerance: ToleranceSpec) -> Self {
        Self {
            t_end,
            tolerance,
            h0: 0.01,
            h_min: 1e-12,
            quench_enabled: true,
            max_steps: 10_000_000,
            propagator: Propagator::default(),
            keep_policy: KeepPolicy::default(),
            guard_margin: tracker::DEFAULT_GUARD_MARGIN,
        }
    }

    fn validate(&self, t0: f64) -> Result<()> {
        if !self.t_end.is_finite() || self.t_end < t0 {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must not precede t0 = {t0}",
                self.t_end
            )));
        }
        if !(self.h0 > 0.0 && self.h_min > 0.0) {
            return Err(Error::InvalidConfig("h0 and h_min must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub i: usize,
    pub t: f64,
    /// Step that reached this node; zero for the initial node.
    pub h: f64,
    pub y34: StateVector,
    pub y8: StateVector,
    /// `y34 - y8` as stored, i.e. after any quench.
    pub global_error_est: Vec2,
    pub eps8: Vec2,
    pub delta8: Vec2,
    pub quenched: bool,
    pub h34: f64,
    pub h8: f64,
    /// Tolerance in force for the step that reached this node.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub node_count: usize,
    pub quench_count: usize,
    pub max_gerr: Vec2,
    pub max_h_err: f64,
    pub max_traj_err: f64,
    pub max_delta8: f64,
    pub reference_guard_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub nodes: Vec<NodeRecord>,
    pub summary: RunSummary,
}

impl Trajectory {
    pub fn last(&self) -> &NodeRecord {
        self.nodes
            .last()
            .expect("a trajectory always holds the initial node")
    }
}

/// The three methods of the scheme: the low/high local extrapolation pair and
/// the reference.
#[derive(Debug, Clone)]
pub struct Methods {
    pub low: ButcherTableau,
    pub high: ButcherTableau,
    pub reference: ButcherTableau,
}

impl Default for Methods {
    fn default() -> Self {
        Self {
            low: ButcherTableau::kutta3(),
            high: ButcherTableau::classical_rk4(),
            reference: ButcherTableau::cooper_verner8(),
        }
    }
}

/// True iff `|est|_inf > delta`.
pub fn quench_decision(global_error_est: Vec2, delta: f64) -> bool {
    max_norm(&global_error_est) > delta
}

fn diff2(a: &[f64], b: &[f64]) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[allow(clippy::too_many_arguments)]
fn record(
    problem: &HamiltonianProblem,
    i: usize,
    t: f64,
    h: f64,
    y34: StateVector,
    reference: &ReferenceState,
    quenched: bool,
    tolerance: f64,
) -> NodeRecord {
    NodeRecord {
        i,
        t,
        h,
        global_error_est: diff2(&y34, &reference.y8),
        h34: problem.energy(&y34),
        h8: problem.energy(&reference.y8),
        y34,
        y8: reference.y8.clone(),
        eps8: reference.eps8_last,
        delta8: reference.delta8,
        quenched,
        tolerance,
    }
}

/// Runs the scheme with the default RK3/RK4/RK8 methods.
pub fn integrate(problem: &HamiltonianProblem, config: &RunConfig) -> Result<Trajectory> {
    integrate_with(problem, config, &Methods::default())
}

/// Local extrapolation only: the reference is still carried for error
/// measurement, but never fed back.
pub fn integrate_unquenched(
    problem: &HamiltonianProblem,
    config: &RunConfig,
) -> Result<Trajectory> {
    let config = RunConfig {
        quench_enabled: false,
        ..config.clone()
    };
    integrate_with(problem, &config, &Methods::default())
}

pub fn integrate_with(
    problem: &HamiltonianProblem,
    config: &RunConfig,
    methods: &Methods,
) -> Result<Trajectory> {
    let ivp = &problem.ivp;
    config.validate(ivp.t0)?;
    let rhs = &*ivp.rhs;
    let order_low = methods.low.declared_order();
    let tracker = Tracker::new(
        methods.reference.clone(),
        config.propagator,
        config.keep_policy,
    );

    let mut t = ivp.t0;
    let mut y34 = ivp.y0.clone();
    let mut reference = ReferenceState::new(ivp.y0.clone());
    let mut h = config.h0;
    let mut summary = SummaryBuilder::default();

    let initial = record(
        problem,
        0,
        t,
        0.0,
        y34.clone(),
        &reference,
        false,
        tolerance_at(&y34, &config.tolerance),
    );
    summary.push(problem, &initial, config);
    let mut nodes = vec![initial];

    while t < config.t_end {
        if nodes.len() > config.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: config.max_steps,
                t,
            });
        }
        let delta = tolerance_at(&y34, &config.tolerance);

        let (attempt, last) = loop {
            let remaining = config.t_end - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let mut attempt =
                controller::pair_step(&methods.low, &methods.high, rhs, t, &y34, h_try)?;
            attempt.decide(delta, order_low);
            if attempt.accepted {
                break (attempt, last);
            }
            h = attempt.h_next;
            if h < config.h_min {
                return Err(Error::StepsizeUnderflow {
                    t,
                    h,
                    h_min: config.h_min,
                });
            }
        };

        let h_used = attempt.h_used;
        tracker.advance(&mut reference, problem, t, h_used)?;
        t = if last { config.t_end } else { t + h_used };
        // A clipped final step says nothing about the natural stepsize.
        if !last {
            h = attempt.h_next;
        }

        y34 = attempt.y_high;
        let quenched = config.quench_enabled && quench_decision(diff2(&y34, &reference.y8), delta);
        if quenched {
            y34 = reference.y8.clone();
        }
        let node = record(
            problem,
            nodes.len(),
            t,
            h_used,
            y34.clone(),
            &reference,
            quenched,
            delta,
        );
        summary.push(problem, &node, config);
        nodes.push(node);
    }

    let summary = summary.finish(nodes.len());
    if !summary.reference_guard_ok {
        log::warn!(
            "reference error estimate {:e} is not negligible against the tolerance",
            summary.max_delta8
        );
    }
    Ok(Trajectory { nodes, summary })
}

#[derive(Default)]
struct SummaryBuilder {
    quench_count: usize,
    max_gerr: Vec2,
    max_h_err: f64,
    max_traj_err: f64,
    max_delta8: f64,
    guard_failures: usize,
}

impl SummaryBuilder {
    fn push(&mut self, problem: &HamiltonianProblem, node: &NodeRecord, config: &RunConfig) {
        self.quench_count += node.quenched as usize;
        for k in 0..2 {
            self.max_gerr[k] = self.max_gerr[k].max(node.global_error_est[k].abs());
        }
        self.max_h_err = self.max_h_err.max((node.h34 - problem.h_exact).abs());
        self.max_traj_err = self
            .max_traj_err
            .max(crate::analysis::trajectory_error(&node.y34, &node.y8));
        self.max_delta8 = self.max_delta8.max(max_norm(&node.delta8));
        if !tracker::reference_error_guard(node.delta8, node.tolerance, config.guard_margin) {
            self.guard_failures += 1;
        }
    }

    fn finish(self, node_count: usize) -> RunSummary {
        RunSummary {
            node_count,
            quench_count: self.quench_count,
            max_gerr: self.max_gerr,
            max_h_err: self.max_h_err,
            max_traj_err: self.max_traj_err,
            max_delta8: self.max_delta8,
            reference_guard_ok: self.guard_failures == 0,
        }
    }
}
