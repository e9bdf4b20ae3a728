use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use tor_core::bvp::{solve, CanonicalProblem};
use tor_core::trajectory::sample_trajectory;
use tor_core::verify::{FIG1_ALPHAS, FIG2_SPEEDS, FIG3_SPEEDS, FIG4_SPEEDS, FIG5_SPEEDS, FIG6_SPEEDS};
use tor_core::Error;

use crate::angle::pi_label;
use crate::solve::write_trajectory;
use crate::svg::{Plot, Series};
use crate::sweep::{alpha_grid, failure_count, solve_family, write_rows, Row, COLUMNS};
use crate::{SolverArgs, EXIT_SWEEP_FAILED};

#[derive(Args, Debug)]
pub struct FiguresArgs {
    /// Figure number, 1 to 6.
    #[arg(long)]
    fig: u8,
    /// Output directory for the CSV files and the SVG.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Rows per trajectory CSV (figures 1 and 2).
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// α points per curve (figures 3 to 6), endpoints included.
    #[arg(long, default_value_t = 65)]
    alpha_grid: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

enum Quantity {
    Phi,
    Psi,
    TimeOfFlight,
}

/// Written files and the number of curves or points that failed.
pub struct FigureOutput {
    pub files: Vec<PathBuf>,
    pub failed: usize,
}

fn trajectory_figure(
    args: &FiguresArgs,
    cases: &[(f64, f64, String, String)],
    title: &str,
) -> anyhow::Result<FigureOutput> {
    let config = args.solver.config()?;
    let mut files = Vec::new();
    let mut series = Vec::new();
    let mut failed = 0;
    for (speed, alpha, tag, label) in cases {
        let problem = CanonicalProblem::new(*speed, *alpha)?;
        let Ok(sol) = solve(&problem, &config) else {
            eprintln!("fig{}: no solution for {label}", args.fig);
            failed += 1;
            continue;
        };
        let report = sample_trajectory(&sol, &problem, args.samples)?;
        let path = args.out.join(format!("fig{}_{tag}.csv", args.fig));
        write_trajectory(&path, &report.samples)?;
        files.push(path);
        series.push(Series {
            label: label.clone(),
            points: report.samples.iter().map(|s| (s.x.x, s.x.y)).collect(),
        });
    }
    let plot = Plot {
        title: title.to_string(),
        x_label: "x".into(),
        y_label: "y".into(),
        series,
        equal_aspect: true,
    };
    files.push(write_svg(&args.out, args.fig, &plot)?);
    Ok(FigureOutput { files, failed })
}

fn curve_figure(
    args: &FiguresArgs,
    speeds: &[f64],
    alpha_max: f64,
    quantity: Quantity,
    title: &str,
) -> anyhow::Result<FigureOutput> {
    if args.alpha_grid < 2 {
        return Err(Error::InvalidProblem("--alpha-grid must be at least 2".into()).into());
    }
    let config = args.solver.config()?;
    let alphas = alpha_grid(args.alpha_grid, alpha_max);
    let curves = solve_family(speeds, &alphas, &config)?;
    let mut files = Vec::new();
    let mut series = Vec::new();
    let mut failed = 0;
    for (speed, rows) in speeds.iter().zip(&curves) {
        let path = args.out.join(format!("fig{}_speed_{speed}.csv", args.fig));
        write_rows(&path, rows, &COLUMNS)?;
        files.push(path);
        failed += failure_count(rows);
        series.push(Series {
            label: format!("|v0| = {speed}"),
            points: rows.iter().map(|r| (r.alpha / PI, value(r, &quantity))).collect(),
        });
    }
    let y_label = match quantity {
        Quantity::Phi => "phi (initial control angle)",
        Quantity::Psi => "psi (final control angle)",
        Quantity::TimeOfFlight => "t_f",
    };
    let plot = Plot {
        title: title.to_string(),
        x_label: "alpha / pi".into(),
        y_label: y_label.into(),
        series,
        equal_aspect: false,
    };
    files.push(write_svg(&args.out, args.fig, &plot)?);
    Ok(FigureOutput { files, failed })
}

fn value(row: &Row, q: &Quantity) -> f64 {
    match (row.result, q) {
        (None, _) => f64::NAN,
        (Some(c), Quantity::Phi) => c.phi,
        (Some(c), Quantity::Psi) => c.psi,
        (Some(c), Quantity::TimeOfFlight) => c.t_f,
    }
}

fn write_svg(dir: &Path, fig: u8, plot: &Plot) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("fig{fig}.svg"));
    fs::write(&path, plot.render())?;
    Ok(path)
}

pub fn generate(args: &FiguresArgs) -> anyhow::Result<FigureOutput> {
    if args.samples < 2 {
        return Err(Error::InvalidProblem("--samples must be at least 2".into()).into());
    }
    match args.fig {
        1 => {
            let cases: Vec<_> = FIG1_ALPHAS
                .iter()
                .map(|a| {
                    let l = pi_label(a * PI);
                    (3.0, a * PI, format!("alpha_{l}"), format!("alpha = {l}"))
                })
                .collect();
            trajectory_figure(args, &cases, "Optimal trajectories, |v0| = 3")
        }
        2 => {
            let cases: Vec<_> = FIG2_SPEEDS
                .iter()
                .map(|&s| (s, 0.75 * PI, format!("speed_{s}"), format!("|v0| = {s}")))
                .collect();
            trajectory_figure(args, &cases, "Optimal trajectories, alpha = 0.75 pi")
        }
        3 => curve_figure(args, &FIG3_SPEEDS, PI, Quantity::Phi, "Initial control direction"),
        4 => curve_figure(args, &FIG4_SPEEDS, PI, Quantity::Psi, "Final control direction"),
        5 => curve_figure(args, &FIG5_SPEEDS, PI, Quantity::TimeOfFlight, "Optimal time"),
        6 => curve_figure(args, &FIG6_SPEEDS, 0.5 * PI, Quantity::TimeOfFlight, "Optimal time, alpha in [0, pi/2]"),
        n => Err(Error::InvalidProblem(format!("--fig must be between 1 and 6, got {n}")).into()),
    }
}

pub fn run(args: &FiguresArgs) -> anyhow::Result<ExitCode> {
    let out = generate(args)?;
    for f in &out.files {
        println!("{}", f.display());
    }
    if out.failed > 0 {
        eprintln!("{} points failed to converge", out.failed);
        Ok(ExitCode::from(EXIT_SWEEP_FAILED))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
