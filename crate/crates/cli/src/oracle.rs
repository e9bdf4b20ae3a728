use std::process::ExitCode;

use clap::{Args, ValueEnum};
use serde_json::json;
use tor_core::bvp::{solve, CanonicalProblem, SolverConfig};
use tor_core::oracle::{bang_oracle_1d, direct_oracle, grid_oracle};

use crate::angle::parse_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Grid,
    Direct,
    Both,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    speed: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Grid points along μ.
    #[arg(long, default_value_t = 100)]
    n_mu: usize,
    /// Grid points along σ.
    #[arg(long, default_value_t = 100)]
    n_sigma: usize,
    #[arg(long, default_value_t = 20.0)]
    mu_max: f64,
    /// Piecewise-constant control segments of the direct transcription.
    #[arg(long, default_value_t = 128)]
    segments: usize,
    /// Terminal feasibility tolerance of the direct transcription.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// Prints a JSON report comparing the oracles with the solver. Collinear
/// problems use the bang-bang enumeration instead.
pub fn run(args: &OracleArgs) -> anyhow::Result<ExitCode> {
    let problem = CanonicalProblem::new(args.speed, args.alpha)?;
    let config = SolverConfig::default();
    let solver_t_f = solve(&problem, &config).ok().map(|s| s.t_f());
    let mut report = json!({
        "problem": problem,
        "solver_t_f": solver_t_f,
    });
    if problem.is_collinear(&config) {
        let (t_f, t_switch) = bang_oracle_1d(problem.signed_speed());
        report["bang"] = json!({ "t_f": t_f, "t_switch": t_switch });
    } else {
        if args.n_mu < 2 || args.n_sigma < 2 || !(args.mu_max > 0.0) {
            return Err(tor_core::Error::InvalidProblem("grid needs n_mu, n_sigma >= 2 and mu_max > 0".into()).into());
        }
        if args.segments < 2 || !(args.tol > 0.0) {
            return Err(tor_core::Error::InvalidProblem("direct needs segments >= 2 and tol > 0".into()).into());
        }
        if matches!(args.method, Method::Grid | Method::Both) {
            report["grid"] = serde_json::to_value(grid_oracle(&problem, args.n_mu, args.n_sigma, args.mu_max))?;
        }
        if matches!(args.method, Method::Direct | Method::Both) {
            let d = direct_oracle(&problem, args.segments, args.tol)?;
            report["direct"] = json!({
                "t_f": d.t_f,
                "segments": d.segments,
                "violation": d.violation,
            });
        }
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}
