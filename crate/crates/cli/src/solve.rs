use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use tor_core::bvp::{residuals_with_gap, solve, CanonicalProblem, Solution};
use tor_core::trajectory::{control_angles, sample_trajectory, TrajectorySample};
use tor_core::Vector2;

use crate::angle::parse_angle;
use crate::{create_parent, sci, SolverArgs};

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Initial speed |v0| ≥ 0.
    #[arg(long)]
    speed: f64,
    /// Initial direction α ∈ [0, π]; radians or a multiple of π (`0.25pi`).
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    alpha: f64,
    /// Where to write the solution record.
    #[arg(long, default_value = "solution.json")]
    out: PathBuf,
    /// Also write the sampled trajectory to this CSV file.
    #[arg(long)]
    traj: Option<PathBuf>,
    /// Number of trajectory rows, endpoints included.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

/// Contents of `solution.json`. The `solution` member is the complete
/// solver output and is enough to recompute everything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub problem: CanonicalProblem,
    pub branch: String,
    pub t_f: f64,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub one_minus_sigma: Option<f64>,
    pub zeta: Option<Vector2>,
    /// Initial control direction.
    pub eta: Vector2,
    pub phi: f64,
    pub psi: f64,
    /// Reduced-system residuals `(r1, r2)`; absent on the collinear branch.
    pub residuals: Option<[f64; 2]>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub terminal_position_error: f64,
    pub terminal_velocity_error: f64,
    pub solution: Solution,
}

impl SolutionFile {
    pub fn build(problem: &CanonicalProblem, solution: &Solution) -> tor_core::Result<Self> {
        let (phi, psi) = control_angles(solution);
        let (pos_err, vel_err) = terminal_errors(problem, solution)?;
        let mut file = SolutionFile {
            problem: *problem,
            branch: solution.branch_name().to_string(),
            t_f: solution.t_f(),
            mu: None,
            sigma: None,
            one_minus_sigma: None,
            zeta: None,
            eta: solution.control_at(0.0),
            phi,
            psi,
            residuals: None,
            residual_norm: 0.0,
            iterations: 0,
            terminal_position_error: pos_err,
            terminal_velocity_error: vel_err,
            solution: *solution,
        };
        if let Some(s) = solution.planar() {
            let (r1, r2) = residuals_with_gap(s.mu, s.one_minus_sigma, problem)?;
            file.mu = Some(s.mu);
            file.sigma = Some(s.sigma);
            file.one_minus_sigma = Some(s.one_minus_sigma);
            file.zeta = Some(s.zeta);
            file.eta = s.eta;
            file.residuals = Some([r1, r2]);
            file.residual_norm = s.residual_norm;
            file.iterations = s.newton_iters;
        }
        Ok(file)
    }
}

pub fn terminal_errors(problem: &CanonicalProblem, solution: &Solution) -> tor_core::Result<(f64, f64)> {
    let (x, v) = solution.state_at(problem, solution.t_f())?;
    Ok((x.norm(), (v - tor_core::bvp::TARGET_VELOCITY).norm()))
}

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "x", "y", "vx", "vy", "ux", "uy", "speed"];

pub fn write_trajectory(path: &Path, samples: &[TrajectorySample]) -> anyhow::Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(TRAJECTORY_HEADER)?;
    for s in samples {
        w.write_record([s.t, s.x.x, s.x.y, s.v.x, s.v.y, s.u.x, s.u.y, s.speed].map(sci))?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &SolveArgs) -> anyhow::Result<ExitCode> {
    let problem = CanonicalProblem::new(args.speed, args.alpha)?;
    let config = args.solver.config()?;
    if args.traj.is_some() && args.samples < 2 {
        return Err(tor_core::Error::InvalidProblem("--samples must be at least 2".into()).into());
    }
    let solution = solve(&problem, &config)?;
    let file = SolutionFile::build(&problem, &solution)?;
    create_parent(&args.out)?;
    fs::write(&args.out, serde_json::to_string_pretty(&file)? + "\n")
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.traj {
        let report = sample_trajectory(&solution, &problem, args.samples)?;
        write_trajectory(path, &report.samples)?;
    }
    println!(
        "{} branch: t_f = {:.15} phi = {:.12} psi = {:.12} -> {}",
        file.branch,
        file.t_f,
        file.phi,
        file.psi,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
