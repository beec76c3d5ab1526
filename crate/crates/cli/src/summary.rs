//! Flat `key = value` run summaries.

use std::fmt::Write as _;

use rkq::engine::RunSummary;

pub const KEYS: [&str; 9] = [
    "nodes",
    "quenches",
    "max_gerr_q",
    "max_gerr_p",
    "max_traj_err",
    "max_H_err",
    "max_delta8",
    "reference_guard_ok",
    "wall_time_s",
];

pub fn render_summary(summary: &RunSummary, wall_time_s: f64) -> String {
    let values = [
        summary.node_count.to_string(),
        summary.quench_count.to_string(),
        format!("{:?}", summary.max_gerr[0]),
        format!("{:?}", summary.max_gerr[1]),
        format!("{:?}", summary.max_traj_err),
        format!("{:?}", summary.max_h_err),
        format!("{:?}", summary.max_delta8),
        summary.reference_guard_ok.to_string(),
        format!("{wall_time_s:.3}"),
    ];
    let mut out = String::new();
    for (key, value) in KEYS.iter().zip(values) {
        writeln!(out, "{key} = {value}").unwrap();
    }
    out
}

/// Parses `key = value` lines, ignoring blanks.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
