//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function has a plain Rust counterpart returning
//! `Result<_, String>` so it can be tested natively.

use rkq::controller::{tolerance_at, ToleranceSpec};
use rkq::engine::{self, RunConfig};
use rkq::problem;
use rkq::tableau::{empirical_order, ButcherTableau};
use wasm_bindgen::prelude::*;

/// Longest interval the demo will integrate.
pub const MAX_T_END: f64 = 4000.0;
const MAX_STEPS: usize = 2_000_000;

/// Thinned series of one integration plus its summary numbers.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct RunView {
    t: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
    gerr: Vec<f64>,
    h_err: Vec<f64>,
    quench_times: Vec<f64>,
    nodes: usize,
    max_gerr: f64,
    max_h_err: f64,
    max_delta8: f64,
}

#[wasm_bindgen]
impl RunView {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn q(&self) -> Vec<f64> {
        self.q.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn p(&self) -> Vec<f64> {
        self.p.clone()
    }

    /// `|y34 - y8|_inf` per sample.
    #[wasm_bindgen(getter)]
    pub fn gerr(&self) -> Vec<f64> {
        self.gerr.clone()
    }

    /// `|H(y34) - H0|` per sample.
    #[wasm_bindgen(getter, js_name = hErr)]
    pub fn h_err(&self) -> Vec<f64> {
        self.h_err.clone()
    }

    /// Times of every quench event (not thinned).
    #[wasm_bindgen(getter, js_name = quenchTimes)]
    pub fn quench_times(&self) -> Vec<f64> {
        self.quench_times.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[wasm_bindgen(getter, js_name = maxGerr)]
    pub fn max_gerr(&self) -> f64 {
        self.max_gerr
    }

    #[wasm_bindgen(getter, js_name = maxHErr)]
    pub fn max_h_err(&self) -> f64 {
        self.max_h_err
    }

    #[wasm_bindgen(getter, js_name = maxDelta8)]
    pub fn max_delta8(&self) -> f64 {
        self.max_delta8
    }
}

/// Integrates a builtin problem and keeps at most `max_points` samples
/// (evenly strided, final node always kept).
pub fn simulate(
    name: &str,
    t_end: f64,
    tol_abs: f64,
    quench: bool,
    max_points: usize,
) -> Result<RunView, String> {
    let problem = problem::by_name(name).ok_or_else(|| format!("unknown problem `{name}`"))?;
    if t_end.is_nan() || t_end > MAX_T_END {
        return Err(format!("t_end must be at most {MAX_T_END}"));
    }
    let tolerance = ToleranceSpec::absolute(tol_abs).map_err(|e| e.to_string())?;
    let mut config = RunConfig::new(t_end, tolerance);
    config.quench_enabled = quench;
    config.max_steps = MAX_STEPS;
    let traj = engine::integrate(&problem, &config).map_err(|e| e.to_string())?;

    let n = traj.nodes.len();
    let stride = n.div_ceil(max_points.max(2) - 1).max(1);
    let mut view = RunView {
        t: Vec::new(),
        q: Vec::new(),
        p: Vec::new(),
        gerr: Vec::new(),
        h_err: Vec::new(),
        quench_times: traj
            .nodes
            .iter()
            .filter(|r| r.quenched)
            .map(|r| r.t)
            .collect(),
        nodes: n,
        max_gerr: traj.summary.max_gerr[0].max(traj.summary.max_gerr[1]),
        max_h_err: traj.summary.max_h_err,
        max_delta8: traj.summary.max_delta8,
    };
    for (k, r) in traj.nodes.iter().enumerate() {
        if k % stride != 0 && k != n - 1 {
            continue;
        }
        view.t.push(r.t);
        view.q.push(r.y34[0]);
        view.p.push(r.y34[1]);
        view.gerr
            .push(r.global_error_est[0].abs().max(r.global_error_est[1].abs()));
        view.h_err.push(problem.eval_hamiltonian_error(&r.y34));
    }
    Ok(view)
}

/// Per-node tolerance at the state `(q, p)`.
pub fn tolerance(q: f64, p: f64, delta_abs: f64, delta_rel: f64) -> Result<f64, String> {
    let spec = ToleranceSpec::new(delta_abs, delta_rel).map_err(|e| e.to_string())?;
    Ok(tolerance_at(&[q, p], &spec))
}

/// Empirical orders of Euler, RK3, RK4 and RK8 on the harmonic oscillator.
pub fn measure_orders() -> Result<Vec<f64>, String> {
    let ivp = problem::harmonic_problem().ivp;
    let halving =
        |h0: f64, n: usize| -> Vec<f64> { (0..n).map(|k| h0 / 2f64.powi(k as i32)).collect() };
    [
        (ButcherTableau::euler(), halving(1.0 / 64.0, 5)),
        (ButcherTableau::kutta3(), halving(1.0 / 8.0, 5)),
        (ButcherTableau::classical_rk4(), halving(1.0 / 8.0, 5)),
        (ButcherTableau::cooper_verner8(), halving(0.5, 4)),
    ]
    .iter()
    .map(|(tab, hs)| empirical_order(tab, &ivp, 1.0, hs).map_err(|e| e.to_string()))
    .collect()
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(
    name: &str,
    t_end: f64,
    tol_abs: f64,
    quench: bool,
    max_points: usize,
) -> Result<RunView, JsValue> {
    simulate(name, t_end, tol_abs, quench, max_points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = tolerance)]
pub fn tolerance_js(q: f64, p: f64, delta_abs: f64, delta_rel: f64) -> Result<f64, JsValue> {
    tolerance(q, p, delta_abs, delta_rel).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = measureOrders)]
pub fn measure_orders_js() -> Result<Vec<f64>, JsValue> {
    measure_orders().map_err(|e| JsValue::from_str(&e))
}
