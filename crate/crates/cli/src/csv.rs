//! Trajectory CSV files.
//!
//! Columns are fixed:
//! `i,t,h,q34,p34,q8,p8,gerr_q,gerr_p,eps8_q,eps8_p,delta8_q,delta8_p,quenched,H34,H8`.
//! Floats use Rust's shortest round-trip formatting, `quenched` is `0`/`1`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rkq::engine::Trajectory;

pub const HEADER: &str =
    "i,t,h,q34,p34,q8,p8,gerr_q,gerr_p,eps8_q,eps8_p,delta8_q,delta8_p,quenched,H34,H8";

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub i: usize,
    pub t: f64,
    pub h: f64,
    pub q34: f64,
    pub p34: f64,
    pub q8: f64,
    pub p8: f64,
    pub gerr_q: f64,
    pub gerr_p: f64,
    pub eps8_q: f64,
    pub eps8_p: f64,
    pub delta8_q: f64,
    pub delta8_p: f64,
    pub quenched: bool,
    pub h34: f64,
    pub h8: f64,
}

/// Indices of the nodes that are written: every `subsample`-th plus the last.
pub fn sampled_indices(len: usize, subsample: usize) -> Vec<usize> {
    let step = subsample.max(1);
    let mut idx: Vec<usize> = (0..len).step_by(step).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// Writes the header and the sampled nodes. Returns the number of data rows.
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path, subsample: usize) -> io::Result<usize> {
    if subsample == 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "subsample must be at least 1",
        ));
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{HEADER}")?;
    let indices = sampled_indices(traj.nodes.len(), subsample);
    let mut line = String::with_capacity(400);
    for &k in &indices {
        let n = &traj.nodes[k];
        line.clear();
        write!(line, "{}", n.i).unwrap();
        for v in [
            n.t,
            n.h,
            n.y34[0],
            n.y34[1],
            n.y8[0],
            n.y8[1],
            n.global_error_est[0],
            n.global_error_est[1],
            n.eps8[0],
            n.eps8[1],
            n.delta8[0],
            n.delta8[1],
        ] {
            write!(line, ",{v:?}").unwrap();
        }
        write!(line, ",{},{:?},{:?}", n.quenched as u8, n.h34, n.h8).unwrap();
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(indices.len())
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn parse_csv(text: &str) -> io::Result<Vec<Row>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => return Err(invalid(format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(ln, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 16 {
                return Err(invalid(format!("line {}: expected 16 fields", ln + 2)));
            }
            let f = |k: usize| -> io::Result<f64> {
                fields[k]
                    .parse()
                    .map_err(|e| invalid(format!("line {}: field {k}: {e}", ln + 2)))
            };
            let i = fields[0]
                .parse()
                .map_err(|e| invalid(format!("line {}: index: {e}", ln + 2)))?;
            let quenched = match fields[13] {
                "0" => false,
                "1" => true,
                other => return Err(invalid(format!("line {}: quenched = {other}", ln + 2))),
            };
            Ok(Row {
                i,
                t: f(1)?,
                h: f(2)?,
                q34: f(3)?,
                p34: f(4)?,
                q8: f(5)?,
                p8: f(6)?,
                gerr_q: f(7)?,
                gerr_p: f(8)?,
                eps8_q: f(9)?,
                eps8_p: f(10)?,
                delta8_q: f(11)?,
                delta8_p: f(12)?,
                quenched,
                h34: f(14)?,
                h8: f(15)?,
            })
        })
        .collect()
}

pub fn read_trajectory_csv(path: &Path) -> io::Result<Vec<Row>> {
    parse_csv(&fs::read_to_string(path)?)
}
