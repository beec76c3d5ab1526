//! The four result figures, built from trajectory CSV rows only.

use crate::csv::Row;
use crate::svg::{render_figure, thin, Panel, Scale, Series};

const BUCKETS: usize = 1500;
const RKQ_COLOR: &str = "#1f5fbf";
const PLAIN_COLOR: &str = "#d0471f";
const P_COLOR: &str = "#2c9c4a";

/// Rows of one run with a display label.
pub struct Run<'a> {
    pub label: &'a str,
    pub rows: &'a [Row],
}

fn series(rows: &[Row], f: impl Fn(&Row) -> f64) -> Vec<(f64, f64)> {
    thin(
        &rows.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>(),
        BUCKETS,
    )
}

fn color(k: usize) -> &'static str {
    if k == 0 {
        RKQ_COLOR
    } else {
        PLAIN_COLOR
    }
}

/// Solution components over the first periods, phase portrait, and the
/// numerical Hamiltonian of every run.
pub fn solution_figure(runs: &[Run], t_early: f64) -> String {
    let main = &runs[0];
    let early: Vec<Row> = main
        .rows
        .iter()
        .take_while(|r| r.t <= t_early)
        .cloned()
        .collect();
    let q = Panel::new(format!("q(t), {}", main.label), "t", "q", Scale::Linear)
        .series(Series::new("q", RKQ_COLOR, series(&early, |r| r.q34)));
    let p = Panel::new(format!("p(t), {}", main.label), "t", "p", Scale::Linear)
        .series(Series::new("p", P_COLOR, series(&early, |r| r.p34)));
    let phase_points: Vec<(f64, f64)> = main.rows.iter().map(|r| (r.q34, r.p34)).collect();
    let step = (phase_points.len() / 4000).max(1);
    let phase = Panel::new("phase portrait", "q", "p", Scale::Linear).series(Series::new(
        main.label,
        RKQ_COLOR,
        phase_points.into_iter().step_by(step).collect(),
    ));
    let h_exact = main.rows.first().map_or(0.0, |r| r.h34);
    let mut energy = Panel::new("numerical Hamiltonian", "t", "H", Scale::Linear)
        .hline(h_exact, format!("exact {h_exact}"));
    for (k, run) in runs.iter().enumerate() {
        energy = energy.series(Series::new(
            run.label,
            color(k),
            series(run.rows, |r| r.h34),
        ));
    }
    render_figure("Solution and Hamiltonian", &[q, p, phase, energy], 2)
}

/// `|gerr_q|` and `|gerr_p|` against the tolerance.
pub fn global_error_figure(runs: &[Run], tol: f64) -> String {
    let mut panels = Vec::new();
    for (name, pick) in [
        ("q", (|r: &Row| r.gerr_q.abs()) as fn(&Row) -> f64),
        ("p", |r: &Row| r.gerr_p.abs()),
    ] {
        let mut panel = Panel::new(
            format!("global error in {name}"),
            "t",
            &format!("|{name}34 - {name}8|"),
            Scale::Log10,
        )
        .hline(tol, "tolerance");
        for (k, run) in runs.iter().enumerate() {
            panel = panel.series(Series::new(run.label, color(k), series(run.rows, pick)));
        }
        panels.push(panel);
    }
    render_figure("Global error (difference from RK8 reference)", &panels, 1)
}

/// Euclidean phase-space distance to the reference with the sqrt(2) tol line.
pub fn trajectory_error_figure(runs: &[Run], tol: f64) -> String {
    let mut panel = Panel::new("trajectory error", "t", "|(q,p)34 - (q,p)8|", Scale::Log10)
        .hline(std::f64::consts::SQRT_2 * tol, "upper bound");
    for (k, run) in runs.iter().enumerate() {
        panel = panel.series(Series::new(
            run.label,
            color(k),
            series(run.rows, |r| r.gerr_q.hypot(r.gerr_p)),
        ));
    }
    render_figure("Trajectory error in phase space", &[panel], 1)
}

/// Estimated global error of the reference solution.
pub fn reference_error_figure(run: &Run) -> String {
    let panel = Panel::new("estimated RK8 global error", "t", "|delta8|", Scale::Log10)
        .series(Series::new(
            "q",
            RKQ_COLOR,
            series(run.rows, |r| r.delta8_q.abs()),
        ))
        .series(Series::new(
            "p",
            P_COLOR,
            series(run.rows, |r| r.delta8_p.abs()),
        ));
    render_figure(
        &format!("Reference error estimate, {}", run.label),
        &[panel],
        1,
    )
}
