//! Command-line driver: runs the quenched and/or plain integrations, writes
//! trajectory CSVs, summaries and optional SVG figures under `--out`.

pub mod csv;
pub mod figures;
pub mod summary;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use rkq::controller::ToleranceSpec;
use rkq::engine::{self, RunConfig, Trajectory};
use rkq::problem::{self, HamiltonianProblem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN_PROBLEM: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;
pub const EXIT_INTEGRATION: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Local extrapolation with quenching.
    Rkq,
    /// Local extrapolation only.
    Unquenched,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "rkq",
    version,
    about = "RK34 with stepwise global error control by RK8 quenching"
)]
pub struct Args {
    /// Builtin problem: pendulum or harmonic.
    #[arg(long, default_value = "pendulum")]
    pub problem: String,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: Mode,
    #[arg(long = "t-end", default_value_t = 4000.0)]
    pub t_end: f64,
    /// Absolute tolerance on local and global error.
    #[arg(long = "tol-abs", default_value_t = 1e-6)]
    pub tol_abs: f64,
    /// Relative tolerance; 0 selects absolute-only control.
    #[arg(long = "tol-rel", default_value_t = 0.0)]
    pub tol_rel: f64,
    #[arg(long, default_value_t = 0.01)]
    pub h0: f64,
    /// Write every n-th node (the final node is always written).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub subsample: u64,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Also write the four SVG figures.
    #[arg(long)]
    pub figures: bool,
    #[arg(long = "max-steps", default_value_t = 10_000_000)]
    pub max_steps: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown problem `{0}` (expected pendulum or harmonic)")]
    UnknownProblem(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("integration failed: {0}")]
    Integration(#[from] rkq::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::UnknownProblem(_) => EXIT_UNKNOWN_PROBLEM,
            CliError::Output { .. } => EXIT_OUTPUT,
            CliError::Integration(_) => EXIT_INTEGRATION,
        }
    }
}

fn output_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

/// Result of one mode's integration.
pub struct RunOutput {
    pub name: &'static str,
    pub label: &'static str,
    pub trajectory: Trajectory,
    pub wall_time_s: f64,
}

fn run_mode(
    problem: &HamiltonianProblem,
    config: &RunConfig,
    quench: bool,
) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let trajectory = if quench {
        engine::integrate(problem, config)?
    } else {
        engine::integrate_unquenched(problem, config)?
    };
    Ok(RunOutput {
        name: if quench { "rkq" } else { "unquenched" },
        label: if quench { "RK34Q8" } else { "RK34" },
        trajectory,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Executes a parsed command line and writes all outputs.
pub fn execute(args: &Args) -> Result<Vec<RunOutput>, CliError> {
    let problem = problem::by_name(&args.problem)
        .ok_or_else(|| CliError::UnknownProblem(args.problem.clone()))?;
    let tolerance = ToleranceSpec::new(args.tol_abs, args.tol_rel)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut config = RunConfig::new(args.t_end, tolerance);
    config.h0 = args.h0;
    config.max_steps = args.max_steps;

    let runs = match args.mode {
        Mode::Rkq => vec![run_mode(&problem, &config, true)?],
        Mode::Unquenched => vec![run_mode(&problem, &config, false)?],
        Mode::Both => {
            let (a, b) = std::thread::scope(|s| {
                let quenched = s.spawn(|| run_mode(&problem, &config, true));
                let plain = run_mode(&problem, &config, false);
                (quenched.join().expect("integration thread panicked"), plain)
            });
            vec![a?, b?]
        }
    };

    fs::create_dir_all(&args.out).map_err(output_err(&args.out))?;
    let subsample = args.subsample as usize;
    for run in &runs {
        let csv_path = args.out.join(format!("{}.csv", run.name));
        let rows = csv::write_trajectory_csv(&run.trajectory, &csv_path, subsample)
            .map_err(output_err(&csv_path))?;
        let text = summary::render_summary(&run.trajectory.summary, run.wall_time_s);
        let summary_path = args.out.join(format!("{}_summary.txt", run.name));
        fs::write(&summary_path, &text).map_err(output_err(&summary_path))?;
        println!("[{}] {} rows -> {}", run.label, rows, csv_path.display());
        print!("{text}");
    }

    if args.figures {
        write_figures(args, &runs)?;
    }
    Ok(runs)
}

fn write_figures(args: &Args, runs: &[RunOutput]) -> Result<(), CliError> {
    let mut tables = Vec::new();
    for run in runs {
        let path = args.out.join(format!("{}.csv", run.name));
        tables.push(csv::read_trajectory_csv(&path).map_err(output_err(&path))?);
    }
    let views: Vec<figures::Run> = runs
        .iter()
        .zip(&tables)
        .map(|(r, rows)| figures::Run {
            label: r.label,
            rows,
        })
        .collect();
    let t_early = args.t_end.min(50.0);
    let outputs = [
        (
            "fig1_solution.svg",
            figures::solution_figure(&views, t_early),
        ),
        (
            "fig2_global_error.svg",
            figures::global_error_figure(&views, args.tol_abs),
        ),
        (
            "fig3_trajectory_error.svg",
            figures::trajectory_error_figure(&views, args.tol_abs),
        ),
        (
            "fig4_reference_error.svg",
            figures::reference_error_figure(&views[0]),
        ),
    ];
    for (name, svg) in outputs {
        let path = args.out.join(name);
        fs::write(&path, svg).map_err(output_err(&path))?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
