mod angle;
mod figures;
mod oracle;
mod solve;
mod svg;
mod sweep;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tor_core::bvp::SolverConfig;
use tor_core::verify::{self, VerifyOptions};
use tor_core::Error;

const EXIT_INVALID: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_SWEEP_FAILED: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "tor", version, about = "Time-optimal return of a force-bounded point mass")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one canonical problem and write solution.json.
    Solve(solve::SolveArgs),
    /// Solve a family over speeds and an α grid, written as CSV.
    Sweep(sweep::SweepArgs),
    /// Emit the data and an SVG overlay for one of the six figures.
    Figures(figures::FiguresArgs),
    /// Run the acceptance panels and print a pass/fail table.
    Verify(VerifyArgs),
    /// Run the brute-force oracles for one problem.
    Oracle(oracle::OracleArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Closed-form and boundary checks only.
    #[arg(long)]
    quick: bool,
    /// Include the grid and direct-transcription oracle comparison.
    #[arg(long)]
    oracle: bool,
}

/// Solver settings shared by the solving commands.
#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    newton_tol: f64,
    #[arg(long, default_value_t = 60)]
    max_iters: usize,
    /// Upper end of the μ seed range.
    #[arg(long, default_value_t = 50.0)]
    mu_max: f64,
    /// Accepted terminal position/velocity error.
    #[arg(long, default_value_t = 1e-8)]
    terminal_tol: f64,
}

impl SolverArgs {
    pub fn config(&self) -> anyhow::Result<SolverConfig> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidProblem(format!("--{name} must be positive, got {v}")))
            }
        };
        positive("newton-tol", self.newton_tol)?;
        positive("mu-max", self.mu_max)?;
        positive("terminal-tol", self.terminal_tol)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidProblem("--max-iters must be at least 1".into()).into());
        }
        Ok(SolverConfig {
            newton_tol: self.newton_tol,
            max_iters: self.max_iters,
            mu_max: self.mu_max,
            terminal_tol: self.terminal_tol,
            ..SolverConfig::default()
        })
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NoConvergence { .. }) | Some(Error::OracleNonConvergence(_)) => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

fn run_verify(args: &VerifyArgs) -> ExitCode {
    let opts = VerifyOptions {
        quick: args.quick,
        oracle: args.oracle,
    };
    let mut failed = 0;
    let ids = verify::selected(opts);
    for id in &ids {
        let r = verify::run_criterion(*id);
        println!("{r}");
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", ids.len() - failed, ids.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => solve::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Figures(a) => figures::run(a),
        Command::Oracle(a) => oracle::run(a),
        Command::Verify(a) => return run_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

pub fn create_parent(path: &std::path::Path) -> std::io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir),
        _ => Ok(()),
    }
}

/// Fixed 17-significant-digit form used for every float written to CSV.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}
