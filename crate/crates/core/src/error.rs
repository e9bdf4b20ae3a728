use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid kernel parameters: rho = {rho}, sigma = {sigma}")]
    InvalidParams { rho: f64, sigma: f64 },

    #[error("negative radicand {radicand} in R(t)")]
    NegativeRadicand { radicand: f64 },

    #[error("sigma = {sigma} is too close to 1 (log singularity)")]
    SigmaSingular { sigma: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("Newton iteration did not converge from any seed (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },

    #[error("coefficient matrix is singular (det = {det:e}); geometry is degenerate")]
    SingularRecovery { det: f64 },

    #[error("t_f = {t_f} is below the minimum time 2")]
    TimeBelowMinimum { t_f: f64 },

    #[error("oracle failed: {0}")]
    OracleNonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
