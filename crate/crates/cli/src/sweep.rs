use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;
use tor_core::bvp::{solve_from, CanonicalProblem, Seed, SolverConfig};
use tor_core::trajectory::control_angles;
use tor_core::Error;

use crate::angle::parse_angle;
use crate::solve::terminal_errors;
use crate::{create_parent, sci, SolverArgs, EXIT_SWEEP_FAILED};

pub const COLUMNS: [&str; 10] = ["speed", "alpha", "mu", "sigma", "t_f", "phi", "psi", "iters", "residual", "status"];

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated initial speeds.
    #[arg(long, value_delimiter = ',', required = true)]
    speeds: Vec<f64>,
    /// Number of uniformly spaced α points, endpoints included.
    #[arg(long, default_value_t = 64)]
    alpha_grid: usize,
    /// Right end of the α range (radians or `pi` multiple).
    #[arg(long, value_parser = parse_angle, default_value = "pi")]
    alpha_max: f64,
    /// Comma-separated subset of the columns, in output order.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged {
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub t_f: f64,
    pub phi: f64,
    pub psi: f64,
    pub iters: usize,
    /// Reduced residual norm, or the terminal error on the collinear branch.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub speed: f64,
    pub alpha: f64,
    pub result: Option<Converged>,
}

impl Row {
    fn field(&self, column: &str) -> String {
        let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
        match column {
            "speed" => sci(self.speed),
            "alpha" => sci(self.alpha),
            "status" => if self.result.is_some() { "ok" } else { "failed" }.to_string(),
            _ => match &self.result {
                None => String::new(),
                Some(c) => match column {
                    "mu" => opt(c.mu),
                    "sigma" => opt(c.sigma),
                    "t_f" => sci(c.t_f),
                    "phi" => sci(c.phi),
                    "psi" => sci(c.psi),
                    "iters" => c.iters.to_string(),
                    "residual" => sci(c.residual),
                    _ => unreachable!("column names are validated"),
                },
            },
        }
    }
}

/// `n` uniform points on `[0, alpha_max]`, both ends exact.
pub fn alpha_grid(n: usize, alpha_max: f64) -> Vec<f64> {
    (0..n)
        .map(|k| if k + 1 == n { alpha_max } else { alpha_max * k as f64 / (n - 1) as f64 })
        .collect()
}

pub fn validate_sweep(speeds: &[f64], alphas: usize, alpha_max: f64) -> tor_core::Result<()> {
    if speeds.is_empty() {
        return Err(Error::InvalidProblem("at least one speed is required".into()));
    }
    if let Some(s) = speeds.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::InvalidProblem(format!("speeds must be finite and >= 0, got {s}")));
    }
    if alphas < 2 {
        return Err(Error::InvalidProblem(format!("alpha grid needs at least 2 points, got {alphas}")));
    }
    if !(alpha_max > 0.0 && alpha_max <= PI) {
        return Err(Error::InvalidProblem(format!("alpha range end must lie in (0, pi], got {alpha_max}")));
    }
    Ok(())
}

fn solve_point(problem: &CanonicalProblem, config: &SolverConfig, seed: Option<Seed>) -> (Option<Converged>, Option<Seed>) {
    let Ok(sol) = solve_from(problem, config, seed) else {
        return (None, None);
    };
    let (phi, psi) = control_angles(&sol);
    match sol.planar() {
        Some(s) => (
            Some(Converged {
                mu: Some(s.mu),
                sigma: Some(s.sigma),
                t_f: s.t_f,
                phi,
                psi,
                iters: s.newton_iters,
                residual: s.residual_norm,
            }),
            Some(s.seed()),
        ),
        None => {
            let residual = terminal_errors(problem, &sol).map(|(a, b)| a.max(b)).unwrap_or(f64::NAN);
            let c = Converged {
                mu: None,
                sigma: None,
                t_f: sol.t_f(),
                phi,
                psi,
                iters: 0,
                residual,
            };
            (Some(c), None)
        }
    }
}

/// One speed along the α grid, each point seeded from the previous root.
fn solve_curve(speed: f64, alphas: &[f64], config: &SolverConfig) -> Vec<Row> {
    let mut seed = None;
    alphas
        .iter()
        .map(|&alpha| {
            let result = match CanonicalProblem::new(speed, alpha) {
                Ok(p) => {
                    let (r, next) = solve_point(&p, config, seed);
                    if next.is_some() {
                        seed = next;
                    }
                    r
                }
                Err(_) => None,
            };
            Row { speed, alpha, result }
        })
        .collect()
}

fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("TOR_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidProblem(format!("TOR_THREADS must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Solves every speed's curve. Curves run on the worker pool; the returned
/// rows keep the input order.
pub fn solve_family(speeds: &[f64], alphas: &[f64], config: &SolverConfig) -> anyhow::Result<Vec<Vec<Row>>> {
    let pool = thread_pool()?;
    Ok(pool.install(|| speeds.par_iter().map(|&s| solve_curve(s, alphas, config)).collect()))
}

pub fn write_rows(path: &Path, rows: &[Row], columns: &[&str]) -> anyhow::Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(columns)?;
    for r in rows {
        w.write_record(columns.iter().map(|c| r.field(c)))?;
    }
    w.flush()?;
    Ok(())
}

fn resolve_columns(requested: &Option<Vec<String>>) -> tor_core::Result<Vec<&'static str>> {
    let Some(names) = requested else {
        return Ok(COLUMNS.to_vec());
    };
    names
        .iter()
        .map(|n| {
            COLUMNS
                .iter()
                .find(|c| **c == n.trim())
                .copied()
                .ok_or_else(|| Error::InvalidProblem(format!("unknown column `{n}`")))
        })
        .collect()
}

pub fn failure_count(rows: &[Row]) -> usize {
    rows.iter().filter(|r| r.result.is_none()).count()
}

pub fn run(args: &SweepArgs) -> anyhow::Result<ExitCode> {
    validate_sweep(&args.speeds, args.alpha_grid, args.alpha_max)?;
    let columns = resolve_columns(&args.columns)?;
    let config = args.solver.config()?;
    let alphas = alpha_grid(args.alpha_grid, args.alpha_max);
    let rows: Vec<Row> = solve_family(&args.speeds, &alphas, &config)?.into_iter().flatten().collect();
    write_rows(&args.out, &rows, &columns)?;
    let failed = failure_count(&rows);
    println!("{} rows, {} failed -> {}", rows.len(), failed, args.out.display());
    if failed > 0 {
        Ok(ExitCode::from(EXIT_SWEEP_FAILED))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = alpha_grid(64, PI);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[63], PI);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sweep_validation() {
        assert!(validate_sweep(&[], 8, PI).is_err());
        assert!(validate_sweep(&[1.0, -0.1], 8, PI).is_err());
        assert!(validate_sweep(&[1.0], 1, PI).is_err());
        assert!(validate_sweep(&[1.0], 8, 4.0).is_err());
        assert!(validate_sweep(&[0.0, 1.0], 2, PI).is_ok());
    }

    #[test]
    fn failed_row_has_empty_numbers() {
        let r = Row {
            speed: 1.0,
            alpha: 0.5,
            result: None,
        };
        let f: Vec<String> = COLUMNS.iter().map(|c| r.field(c)).collect();
        assert_eq!(f[9], "failed");
        assert!(f[2..9].iter().all(|s| s.is_empty()));
        assert!(!f[0].is_empty() && !f[1].is_empty());
    }

    #[test]
    fn columns_subset_and_unknown() {
        let c = resolve_columns(&Some(vec!["alpha".into(), "t_f".into()])).unwrap();
        assert_eq!(c, vec!["alpha", "t_f"]);
        assert!(resolve_columns(&Some(vec!["bogus".into()])).is_err());
    }

    #[test]
    fn continuation_curve_converges() {
        let alphas = alpha_grid(9, PI);
        let rows = solve_curve(0.7, &alphas, &SolverConfig::default());
        assert_eq!(failure_count(&rows), 0);
        assert!(rows.windows(2).all(|w| w[1].result.unwrap().t_f >= w[0].result.unwrap().t_f - 1e-10));
    }
}
