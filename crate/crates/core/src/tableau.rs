//! Butcher tableaus for explicit Runge-Kutta methods and the generic single step.

use crate::problem::IvpProblem;
use crate::{Error, Result, StateVector};

const CONSISTENCY_TOL: f64 = 1e-14;

/// Coefficients of an explicit Runge-Kutta method.
///
/// `a` is stored as a full square matrix; only the strictly lower triangle may
/// be non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: String,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: u32,
}

impl ButcherTableau {
    /// Builds a tableau and checks that it is explicit, consistent and
    /// satisfies the row-sum condition.
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        order: u32,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidTableau {
            name: name.clone(),
            reason,
        };
        let s = b.len();
        if s == 0 || order == 0 {
            return Err(invalid("empty method".into()));
        }
        if c.len() != s || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(invalid(format!("shape mismatch for {s} stages")));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i..].iter().any(|&x| x != 0.0) {
                return Err(invalid(format!("row {i} is not strictly lower triangular")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - c[i]).abs() > CONSISTENCY_TOL {
                return Err(invalid(format!("c[{i}] = {} but row sum is {sum}", c[i])));
            }
        }
        let bsum: f64 = b.iter().sum();
        if (bsum - 1.0).abs() > CONSISTENCY_TOL {
            return Err(invalid(format!("weights sum to {bsum}")));
        }
        Ok(Self {
            name,
            a,
            b,
            c,
            order,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stage_count(&self) -> usize {
        self.b.len()
    }

    pub fn declared_order(&self) -> u32 {
        self.order
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Forward Euler.
    pub fn euler() -> Self {
        Self::new("euler", vec![vec![0.0]], vec![1.0], vec![0.0], 1).expect("valid tableau")
    }

    /// Kutta's third-order method.
    pub fn kutta3() -> Self {
        Self::new(
            "rk3",
            vec![
                vec![0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0],
                vec![-1.0, 2.0, 0.0],
            ],
            vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 1.0],
            3,
        )
        .expect("valid tableau")
    }

    /// The classical fourth-order method.
    pub fn classical_rk4() -> Self {
        Self::new(
            "rk4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
            4,
        )
        .expect("valid tableau")
    }

    /// Cooper and Verner's 11-stage eighth-order method.
    ///
    /// Coefficients from G. J. Cooper and J. H. Verner, "Some explicit
    /// Runge-Kutta methods of high order", SIAM J. Numer. Anal. 9 (1972),
    /// written in closed form in terms of sqrt(21).
    pub fn cooper_verner8() -> Self {
        let s = 21.0_f64.sqrt();
        let mut a = vec![vec![0.0; 11]; 11];
        let rows: [&[f64]; 11] = [
            &[],
            &[1.0 / 2.0],
            &[1.0 / 4.0, 1.0 / 4.0],
            &[1.0 / 7.0, (-7.0 - 3.0 * s) / 98.0, (21.0 + 5.0 * s) / 49.0],
            &[
                (11.0 + s) / 84.0,
                0.0,
                (18.0 + 4.0 * s) / 63.0,
                (21.0 - s) / 252.0,
            ],
            &[
                (5.0 + s) / 48.0,
                0.0,
                (9.0 + s) / 36.0,
                (-231.0 + 14.0 * s) / 360.0,
                (63.0 - 7.0 * s) / 80.0,
            ],
            &[
                (10.0 - s) / 42.0,
                0.0,
                (-432.0 + 92.0 * s) / 315.0,
                (633.0 - 145.0 * s) / 90.0,
                (-504.0 + 115.0 * s) / 70.0,
                (63.0 - 13.0 * s) / 35.0,
            ],
            &[
                1.0 / 14.0,
                0.0,
                0.0,
                0.0,
                (14.0 - 3.0 * s) / 126.0,
                (13.0 - 3.0 * s) / 63.0,
                1.0 / 9.0,
            ],
            &[
                1.0 / 32.0,
                0.0,
                0.0,
                0.0,
                (91.0 - 21.0 * s) / 576.0,
                11.0 / 72.0,
                (-385.0 - 75.0 * s) / 1152.0,
                (63.0 + 13.0 * s) / 128.0,
            ],
            &[
                1.0 / 14.0,
                0.0,
                0.0,
                0.0,
                1.0 / 9.0,
                (-733.0 - 147.0 * s) / 2205.0,
                (515.0 + 111.0 * s) / 504.0,
                (-51.0 - 11.0 * s) / 56.0,
                (132.0 + 28.0 * s) / 245.0,
            ],
            &[
                0.0,
                0.0,
                0.0,
                0.0,
                (-42.0 + 7.0 * s) / 18.0,
                (-18.0 + 28.0 * s) / 45.0,
                (-273.0 - 53.0 * s) / 72.0,
                (301.0 + 53.0 * s) / 72.0,
                (28.0 - 28.0 * s) / 45.0,
                (49.0 - 7.0 * s) / 18.0,
            ],
        ];
        for (dst, src) in a.iter_mut().zip(rows) {
            dst[..src.len()].copy_from_slice(src);
        }
        // Use the exact row sums for c so the row-sum condition holds to rounding.
        let c = a.iter().map(|row| row.iter().sum()).collect();
        let b = vec![
            1.0 / 20.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            49.0 / 180.0,
            16.0 / 45.0,
            49.0 / 180.0,
            1.0 / 20.0,
        ];
        Self::new("rk8", a, b, c, 8).expect("valid tableau")
    }

    /// Looks up a builtin tableau by its name.
    pub fn lookup(name: &str) -> Result<Self> {
        builtin_tableaus()
            .into_iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::UnknownTableau(name.to_string()))
    }

    fn stages<F>(&self, rhs: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<StateVector>>
    where
        F: Fn(f64, &[f64]) -> StateVector + ?Sized,
    {
        let n = y.len();
        let mut k: Vec<StateVector> = Vec::with_capacity(self.stage_count());
        let mut yi = vec![0.0; n];
        for (i, row) in self.a.iter().enumerate() {
            for (m, out) in yi.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += row[j] * kj[m];
                }
                *out = y[m] + h * acc;
            }
            let ki = rhs(t + self.c[i] * h, &yi);
            if ki.len() != n || ki.iter().chain(yi.iter()).any(|x| !x.is_finite()) {
                return Err(Error::StepFailure {
                    method: self.name.clone(),
                    stage: i,
                });
            }
            k.push(ki);
        }
        Ok(k)
    }

    fn combine(&self, y: &[f64], h: f64, k: &[StateVector]) -> StateVector {
        y.iter()
            .enumerate()
            .map(|(m, &ym)| {
                let mut acc = 0.0;
                for (bi, ki) in self.b.iter().zip(k) {
                    acc += bi * ki[m];
                }
                ym + h * acc
            })
            .collect()
    }

    /// Advances `y` by one step of size `h` from `t`.
    pub fn rk_step<F>(&self, rhs: &F, t: f64, y: &[f64], h: f64) -> Result<StateVector>
    where
        F: Fn(f64, &[f64]) -> StateVector + ?Sized,
    {
        let k = self.stages(rhs, t, y, h)?;
        Ok(self.combine(y, h, &k))
    }

    /// One step together with the Jacobian of the step map `y -> y + h F(t, y, h)`.
    ///
    /// The Jacobian is obtained by differentiating the stage equations, so it
    /// is exact for the discrete method up to rounding. `jac` returns the
    /// row-major `n x n` Jacobian of `rhs`. The result is row-major as well.
    pub fn rk_step_with_jacobian<F, J>(
        &self,
        rhs: &F,
        jac: &J,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<(StateVector, Vec<f64>)>
    where
        F: Fn(f64, &[f64]) -> StateVector + ?Sized,
        J: Fn(f64, &[f64]) -> Vec<f64> + ?Sized,
    {
        let n = y.len();
        let k = self.stages(rhs, t, y, h)?;
        let mut dk: Vec<Vec<f64>> = Vec::with_capacity(self.stage_count());
        let mut yi = vec![0.0; n];
        let mut dyi = vec![0.0; n * n];
        for (i, row) in self.a.iter().enumerate() {
            for m in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().take(i).enumerate() {
                    acc += row[j] * kj[m];
                }
                yi[m] = y[m] + h * acc;
            }
            for r in 0..n * n {
                let mut acc = 0.0;
                for (j, dkj) in dk.iter().enumerate() {
                    acc += row[j] * dkj[r];
                }
                let identity = if r / n == r % n { 1.0 } else { 0.0 };
                dyi[r] = identity + h * acc;
            }
            let ji = jac(t + self.c[i] * h, &yi);
            let mut dki = vec![0.0; n * n];
            for r in 0..n {
                for col in 0..n {
                    dki[r * n + col] = (0..n).map(|m| ji[r * n + m] * dyi[m * n + col]).sum();
                }
            }
            dk.push(dki);
        }
        let y_next = self.combine(y, h, &k);
        let mut step_jac = vec![0.0; n * n];
        for (r, out) in step_jac.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (bi, dki) in self.b.iter().zip(&dk) {
                acc += bi * dki[r];
            }
            let identity = if r / n == r % n { 1.0 } else { 0.0 };
            *out = identity + h * acc;
        }
        Ok((y_next, step_jac))
    }
}

/// Euler, Kutta's RK3, classical RK4 and Cooper-Verner RK8.
pub fn builtin_tableaus() -> Vec<ButcherTableau> {
    vec![
        ButcherTableau::euler(),
        ButcherTableau::kutta3(),
        ButcherTableau::classical_rk4(),
        ButcherTableau::cooper_verner8(),
    ]
}

/// Measures the convergence order of `tableau` on a problem with a known
/// solution: the least-squares slope of `log(error(t_end))` against `log(h)`.
///
/// Every `h` must divide `t_end - t0` into a whole number of steps, and the
/// sequence must have at least four entries, each half the previous one.
pub fn empirical_order(
    tableau: &ButcherTableau,
    problem: &IvpProblem,
    t_end: f64,
    h_sequence: &[f64],
) -> Result<f64> {
    let exact = problem.exact_solution.as_ref().ok_or_else(|| {
        Error::InvalidConfig("empirical order needs a problem with an exact solution".into())
    })?;
    if h_sequence.len() < 4 {
        return Err(Error::InvalidConfig("need at least four stepsizes".into()));
    }
    for w in h_sequence.windows(2) {
        if (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0] {
            return Err(Error::InvalidConfig(
                "each stepsize must halve the previous".into(),
            ));
        }
    }
    let span = t_end - problem.t0;
    let target = exact(t_end);
    let mut points = Vec::with_capacity(h_sequence.len());
    for (idx, &h) in h_sequence.iter().enumerate() {
        let steps = (span / h).round();
        if h <= 0.0 || steps < 1.0 || (steps * h - span).abs() > 1e-9 * span.abs().max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "h = {h} does not divide the interval"
            )));
        }
        let mut y = problem.y0.clone();
        for n in 0..steps as usize {
            y = tableau.rk_step(&*problem.rhs, problem.t0 + n as f64 * h, &y, h)?;
        }
        let err = y
            .iter()
            .zip(&target)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if idx == 0 && err < 100.0 * f64::EPSILON {
            return Err(Error::OrderNotMeasurable { error: err });
        }
        points.push((h.ln(), err.max(f64::MIN_POSITIVE).ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}
