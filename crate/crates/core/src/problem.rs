//! Initial-value problems and the builtin Hamiltonian test problems.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Mat2, Result, StateVector};

pub type RhsFn = dyn Fn(f64, &[f64]) -> StateVector + Send + Sync;
/// Row-major `n x n` Jacobian of the right-hand side.
pub type JacobianFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;
pub type SolutionFn = dyn Fn(f64) -> StateVector + Send + Sync;
/// Energy as a function of `(p, q)`.
pub type EnergyFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// `y' = f(t, y)`, `y(t0) = y0`.
#[derive(Clone)]
pub struct IvpProblem {
    pub dimension: usize,
    pub rhs: Arc<RhsFn>,
    pub jacobian: Option<Arc<JacobianFn>>,
    pub t0: f64,
    pub y0: StateVector,
    pub exact_solution: Option<Arc<SolutionFn>>,
}

impl fmt::Debug for IvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvpProblem")
            .field("dimension", &self.dimension)
            .field("t0", &self.t0)
            .field("y0", &self.y0)
            .field("jacobian", &self.jacobian.is_some())
            .field("exact_solution", &self.exact_solution.is_some())
            .finish()
    }
}

impl IvpProblem {
    pub fn new<F>(rhs: F, t0: f64, y0: StateVector) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> StateVector + Send + Sync + 'static,
    {
        let f0 = rhs(t0, &y0);
        if y0.is_empty() || f0.len() != y0.len() {
            return Err(Error::InvalidConfig(
                "rhs dimension does not match y0".into(),
            ));
        }
        if f0.iter().chain(&y0).any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("rhs(t0, y0) is not finite".into()));
        }
        Ok(Self {
            dimension: y0.len(),
            rhs: Arc::new(rhs),
            jacobian: None,
            t0,
            y0,
            exact_solution: None,
        })
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_exact_solution<S>(mut self, sol: S) -> Self
    where
        S: Fn(f64) -> StateVector + Send + Sync + 'static,
    {
        self.exact_solution = Some(Arc::new(sol));
        self
    }

    /// Jacobian of the right-hand side, falling back to central differences
    /// with step `max(1e-6, 1e-6 |y_j|)` when none was supplied.
    pub fn jacobian_at(&self, t: f64, y: &[f64]) -> Vec<f64> {
        match &self.jacobian {
            Some(jac) => jac(t, y),
            None => central_difference_jacobian(&*self.rhs, t, y),
        }
    }

    pub fn jacobian_fn(&self) -> impl Fn(f64, &[f64]) -> Vec<f64> + '_ {
        move |t, y| self.jacobian_at(t, y)
    }
}

pub(crate) fn central_difference_jacobian(rhs: &RhsFn, t: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut jac = vec![0.0; n * n];
    let mut yp = y.to_vec();
    for col in 0..n {
        let step = 1e-6_f64.max(1e-6 * y[col].abs());
        yp[col] = y[col] + step;
        let fp = rhs(t, &yp);
        yp[col] = y[col] - step;
        let fm = rhs(t, &yp);
        yp[col] = y[col];
        for row in 0..n {
            jac[row * n + col] = (fp[row] - fm[row]) / (2.0 * step);
        }
    }
    jac
}

/// A one degree of freedom Hamiltonian system with state ordered `(q, p)`.
#[derive(Clone)]
pub struct HamiltonianProblem {
    pub name: String,
    pub ivp: IvpProblem,
    pub hamiltonian: Arc<EnergyFn>,
    /// `H(p0, q0)`, the value the exact flow conserves.
    pub h_exact: f64,
}

impl fmt::Debug for HamiltonianProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianProblem")
            .field("name", &self.name)
            .field("ivp", &self.ivp)
            .field("h_exact", &self.h_exact)
            .finish()
    }
}

impl HamiltonianProblem {
    pub fn new<H>(name: impl Into<String>, ivp: IvpProblem, hamiltonian: H) -> Result<Self>
    where
        H: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if ivp.dimension != 2 {
            return Err(Error::InvalidConfig(
                "a Hamiltonian problem has exactly one (q, p) pair".into(),
            ));
        }
        let h_exact = hamiltonian(ivp.y0[1], ivp.y0[0]);
        Ok(Self {
            name: name.into(),
            ivp,
            hamiltonian: Arc::new(hamiltonian),
            h_exact,
        })
    }

    /// `H` at a state ordered `(q, p)`.
    pub fn energy(&self, y: &[f64]) -> f64 {
        (self.hamiltonian)(y[1], y[0])
    }

    pub fn rhs(&self, t: f64, y: &[f64]) -> StateVector {
        (self.ivp.rhs)(t, y)
    }

    pub fn jacobian2(&self, t: f64, y: &[f64]) -> Mat2 {
        let j = self.ivp.jacobian_at(t, y);
        [[j[0], j[1]], [j[2], j[3]]]
    }

    /// `|H(p, q) - H(p0, q0)|`.
    pub fn eval_hamiltonian_error(&self, y: &[f64]) -> f64 {
        (self.energy(y) - self.h_exact).abs()
    }
}

/// `H(p, q) = p^2/2 - (1 - p/6) cos q`, started from `q = arccos(-0.8)`, `p = 0`.
pub fn pendulum_problem() -> HamiltonianProblem {
    let rhs = |_t: f64, y: &[f64]| {
        let (q, p) = (y[0], y[1]);
        vec![p + q.cos() / 6.0, (p / 6.0 - 1.0) * q.sin()]
    };
    let jac = |_t: f64, y: &[f64]| {
        let (q, p) = (y[0], y[1]);
        let (s, c) = q.sin_cos();
        vec![-s / 6.0, 1.0, (p / 6.0 - 1.0) * c, s / 6.0]
    };
    let ivp = IvpProblem::new(rhs, 0.0, vec![(-0.8_f64).acos(), 0.0])
        .expect("finite initial data")
        .with_jacobian(jac);
    HamiltonianProblem::new("pendulum", ivp, |p, q| {
        p * p / 2.0 - (1.0 - p / 6.0) * q.cos()
    })
    .expect("two-dimensional")
}

/// `H = (p^2 + q^2)/2` from `(q, p) = (1, 0)`; exact solution `q = cos t`, `p = -sin t`.
pub fn harmonic_problem() -> HamiltonianProblem {
    let ivp = IvpProblem::new(|_t, y: &[f64]| vec![y[1], -y[0]], 0.0, vec![1.0, 0.0])
        .expect("finite initial data")
        .with_jacobian(|_t, _y: &[f64]| vec![0.0, 1.0, -1.0, 0.0])
        .with_exact_solution(|t| vec![t.cos(), -t.sin()]);
    HamiltonianProblem::new("harmonic", ivp, |p, q| 0.5 * (p * p + q * q)).expect("two-dimensional")
}

/// Builtin problems by name: `pendulum` or `harmonic`.
pub fn by_name(name: &str) -> Option<HamiltonianProblem> {
    match name {
        "pendulum" => Some(pendulum_problem()),
        "harmonic" => Some(harmonic_problem()),
        _ => None,
    }
}
