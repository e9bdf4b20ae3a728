//! Reduced two-point boundary value problem and its Newton solver.
//!
//! The unknowns `ξ`, `η` and `t_f` are replaced by `μ = |ξ| t_f`, `σ` and
//! `t_f`. Given `(μ, σ)`, the terminal conditions fix
//! `t_f = fx2^{-1/2}`, and the remaining two scalar conditions
//!
//! ```text
//! r1 = |v0|² fx2 − f02
//! r2 = fx2 |v0| c − f12,     c = cos(v0, v_f) = −cos α
//! ```
//!
//! are driven to zero by damped Newton. Iterates live in
//! `(ln μ, ln(1 − σ))`: roots cluster within 1e-4..1e-9 of `σ = 1`, where a
//! step in `σ` itself would be meaningless at double precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, forms_from_coefficients, KernelParams, MIN_SIGMA_GAP};
use crate::one_dim::{self, OneDimSolution};
use crate::vector::Vector2;

/// Terminal velocity of the canonical problem.
pub const TARGET_VELOCITY: Vector2 = Vector2::new(-1.0, 0.0);

/// Canonical problem: start at the origin with speed `speed` in direction
/// `alpha`, return to the origin with velocity `(−1, 0)`, `|u| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalProblem {
    pub speed: f64,
    pub alpha: f64,
}

impl CanonicalProblem {
    pub fn new(speed: f64, alpha: f64) -> Result<Self> {
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(Error::InvalidProblem(format!("speed must be finite and >= 0, got {speed}")));
        }
        if !(0.0..=PI).contains(&alpha) {
            return Err(Error::InvalidProblem(format!("alpha must lie in [0, pi], got {alpha}")));
        }
        Ok(Self { speed, alpha })
    }

    /// Accepts any direction angle and maps it into `[0, π]` by the mirror
    /// symmetry about the abscissa. Returns whether a reflection was applied.
    pub fn reduced(speed: f64, alpha: f64) -> Result<(Self, bool)> {
        if !alpha.is_finite() {
            return Err(Error::InvalidProblem(format!("alpha must be finite, got {alpha}")));
        }
        let a = alpha.rem_euclid(2.0 * PI);
        let (a, reflected) = if a > PI { (2.0 * PI - a, true) } else { (a, false) };
        Ok((Self::new(speed, a.clamp(0.0, PI))?, reflected))
    }

    pub fn v0(&self) -> Vector2 {
        Vector2::from_angle(self.alpha) * self.speed
    }

    /// `cos(v0, v_f)`.
    pub fn cos_to_target(&self) -> f64 {
        -self.alpha.cos()
    }

    pub fn is_collinear(&self, config: &SolverConfig) -> bool {
        self.speed < config.collinear_speed || self.alpha.sin() < config.collinear_sin
    }

    /// Signed speed along the abscissa, for collinear problems.
    pub fn signed_speed(&self) -> f64 {
        if self.alpha.cos() >= 0.0 {
            self.speed
        } else {
            -self.speed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on `|(r1, r2)|`.
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Backtracking factor of the line search.
    pub damping: f64,
    pub min_step: f64,
    /// Seed grid size `(n_mu, n_sigma)`.
    pub seed_grid: (usize, usize),
    pub mu_max: f64,
    pub collinear_sin: f64,
    pub collinear_speed: f64,
    pub continuation_steps: usize,
    /// Ranked seeds tried before settling on the best verified root. More
    /// are tried while no root has been verified.
    pub seed_attempts: usize,
    /// Bound on terminal position/velocity error of an accepted root.
    pub terminal_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            max_iters: 60,
            damping: 0.5,
            min_step: 1e-6,
            seed_grid: (40, 39),
            mu_max: 50.0,
            collinear_sin: 1e-8,
            collinear_speed: 1e-12,
            continuation_steps: 16,
            seed_attempts: 24,
            terminal_tol: 1e-8,
        }
    }
}

/// Starting point for Newton, stored as `(μ, 1 − σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub mu: f64,
    pub one_minus_sigma: f64,
}

impl Seed {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Self {
            mu,
            one_minus_sigma: 1.0 - sigma,
        }
    }

    pub fn sigma(&self) -> f64 {
        1.0 - self.one_minus_sigma
    }
}

/// Solved costate data of a planar (non-collinear) problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjointSolution {
    pub mu: f64,
    pub sigma: f64,
    /// `1 − σ` at full precision.
    pub one_minus_sigma: f64,
    pub t_f: f64,
    /// `ζ = ξ t_f`, `|ζ| = μ`.
    pub zeta: Vector2,
    /// Unit vector; the initial control direction.
    pub eta: Vector2,
    pub residual_norm: f64,
    pub newton_iters: usize,
}

impl AdjointSolution {
    pub fn xi(&self) -> Vector2 {
        self.zeta / self.t_f
    }

    pub fn rho(&self) -> f64 {
        self.mu / self.t_f
    }

    pub fn seed(&self) -> Seed {
        Seed {
            mu: self.mu,
            one_minus_sigma: self.one_minus_sigma,
        }
    }

    pub fn kernel_params(&self) -> Result<KernelParams> {
        KernelParams::with_gap(self.rho(), self.one_minus_sigma)
    }

    /// Optimal control `u = (η − ξt)/|η − ξt|`.
    pub fn control_at(&self, t: f64) -> Vector2 {
        let q = self.eta - self.xi() * t;
        let n = q.norm();
        if n > 0.0 {
            q / n
        } else {
            self.eta
        }
    }

    /// Closed-form state `(x(t), v(t))` starting from the origin.
    pub fn state_at(&self, problem: &CanonicalProblem, t: f64) -> Result<(Vector2, Vector2)> {
        let k = kernels::kernels(&self.kernel_params()?, t)?;
        let xi = self.xi();
        let v0 = problem.v0();
        let x = v0 * t + xi * k.x_xi + self.eta * k.x_eta;
        let v = v0 + xi * k.v_xi + self.eta * k.v_eta;
        Ok((x, v))
    }

    /// Terminal errors `(|x(t_f)|, |v(t_f) − v_f|)` from the closed form.
    pub fn terminal_errors(&self, problem: &CanonicalProblem) -> Result<(f64, f64)> {
        let (x, v) = self.state_at(problem, self.t_f)?;
        Ok((x.norm(), (v - TARGET_VELOCITY).norm()))
    }
}

/// Result of [`solve`]: either the planar steering solution or the
/// collinear bang-bang one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Solution {
    Planar(AdjointSolution),
    Collinear {
        solution: OneDimSolution,
        /// Signed speed along the abscissa.
        v0: f64,
    },
}

impl Solution {
    pub fn t_f(&self) -> f64 {
        match self {
            Solution::Planar(s) => s.t_f,
            Solution::Collinear { solution, .. } => solution.t_f,
        }
    }

    pub fn planar(&self) -> Option<&AdjointSolution> {
        match self {
            Solution::Planar(s) => Some(s),
            Solution::Collinear { .. } => None,
        }
    }

    pub fn branch_name(&self) -> &'static str {
        match self {
            Solution::Planar(_) => "planar",
            Solution::Collinear { .. } => "collinear",
        }
    }

    /// Control at time `t`; the collinear law is embedded along the abscissa.
    pub fn control_at(&self, t: f64) -> Vector2 {
        match self {
            Solution::Planar(s) => s.control_at(t),
            Solution::Collinear { solution, v0 } => {
                if solution.t_f == 0.0 {
                    return Vector2::ZERO;
                }
                let (_, _, u) = one_dim::one_dim_state(solution, *v0, t / solution.t_f);
                Vector2::new(u, 0.0)
            }
        }
    }

    pub fn state_at(&self, problem: &CanonicalProblem, t: f64) -> Result<(Vector2, Vector2)> {
        match self {
            Solution::Planar(s) => s.state_at(problem, t),
            Solution::Collinear { solution, v0 } => {
                if solution.t_f == 0.0 {
                    return Ok((Vector2::ZERO, Vector2::new(*v0, 0.0)));
                }
                let (x, v, _) = one_dim::one_dim_state(solution, *v0, t / solution.t_f);
                Ok((Vector2::new(x, 0.0), Vector2::new(v, 0.0)))
            }
        }
    }
}

fn residuals_at(params: &KernelParams, problem: &CanonicalProblem) -> Result<([f64; 2], f64)> {
    let c = kernels::coefficients_at(params)?;
    let f = forms_from_coefficients(&c, params.rho, params.sigma);
    let s = problem.speed;
    let r1 = s * s * f.fx2 - f.f02;
    let r2 = f.fx2 * s * problem.cos_to_target() - f.f12;
    Ok(([r1, r2], f.fx2))
}

/// Residuals `(r1, r2)` of the reduced system at `(μ, σ)`.
pub fn residuals(mu: f64, sigma: f64, problem: &CanonicalProblem) -> Result<(f64, f64)> {
    let ([r1, r2], _) = residuals_at(&KernelParams::new(mu, sigma)?, problem)?;
    Ok((r1, r2))
}

/// Residuals at `(μ, 1 − σ)`, keeping the gap at full precision.
pub fn residuals_with_gap(mu: f64, one_minus_sigma: f64, problem: &CanonicalProblem) -> Result<(f64, f64)> {
    let ([r1, r2], _) = residuals_at(&KernelParams::with_gap(mu, one_minus_sigma)?, problem)?;
    Ok((r1, r2))
}

/// Residual norm at a seed, or `None` outside the admissible region.
pub fn seed_residual(seed: &Seed, problem: &CanonicalProblem) -> Option<f64> {
    let p = KernelParams::with_gap(seed.mu, seed.one_minus_sigma).ok()?;
    let ([r1, r2], _) = residuals_at(&p, problem).ok()?;
    let n = r1.hypot(r2);
    n.is_finite().then_some(n)
}

/// Solves the 2×2 vector system for `(ζ, η)`.
pub fn recover_adjoint(mu: f64, sigma: f64, t_f: f64, problem: &CanonicalProblem) -> Result<(Vector2, Vector2)> {
    recover_at(&KernelParams::new(mu, sigma)?, t_f, problem)
}

fn recover_at(params: &KernelParams, t_f: f64, problem: &CanonicalProblem) -> Result<(Vector2, Vector2)> {
    let c = kernels::coefficients_at(params)?;
    let det = c.a_zeta * c.b_eta - c.a_eta * c.b_zeta;
    let scale = (c.a_zeta * c.b_eta).abs().max((c.a_eta * c.b_zeta).abs());
    if !(det.abs() >= 1e-12 * scale) || scale == 0.0 {
        return Err(Error::SingularRecovery { det });
    }
    let rhs1 = TARGET_VELOCITY / t_f;
    let rhs2 = (problem.v0() - TARGET_VELOCITY) / t_f;
    let zeta = (rhs1 * c.b_eta - rhs2 * c.a_eta) / det;
    let eta = (rhs2 * c.a_zeta - rhs1 * c.b_zeta) / det;
    Ok((zeta, eta))
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| {
        if n == 1 {
            hi
        } else {
            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
        }
    })
}

/// Grid seeds ranked by ascending residual norm, with the continuation
/// seed (when supplied) placed first.
///
/// `μ` is log-spaced on `[1e-4 μ_max, μ_max]`; `1 − σ` is log-spaced on
/// `[1e-6, 2 − 1e-6]`, which concentrates seeds near `σ = 1` where roots lie.
pub fn seed_candidates(problem: &CanonicalProblem, config: &SolverConfig, continuation: Option<Seed>) -> Vec<Seed> {
    let (n_mu, n_sigma) = config.seed_grid;
    let mut ranked: Vec<(f64, Seed)> = Vec::with_capacity(n_mu * n_sigma);
    for mu in log_space(config.mu_max * 1e-4, config.mu_max, n_mu) {
        for gap in log_space(1e-6, 2.0 - 1e-6, n_sigma) {
            let seed = Seed {
                mu,
                one_minus_sigma: gap,
            };
            if let Some(r) = seed_residual(&seed, problem) {
                ranked.push((r, seed));
            }
        }
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    continuation
        .into_iter()
        .chain(ranked.into_iter().map(|(_, s)| s))
        .collect()
}

/// One Newton run from `seed`. Returns the root and iteration count.
fn newton(seed: Seed, problem: &CanonicalProblem, config: &SolverConfig) -> Option<(Seed, f64, usize)> {
    let lo = [1e-10f64.ln(), (2.0 * MIN_SIGMA_GAP).ln()];
    let hi = [config.mu_max.ln(), 2f64.ln()];
    let clamp = |z: [f64; 2]| [z[0].clamp(lo[0], hi[0]), z[1].clamp(lo[1], hi[1])];
    let eval = |z: [f64; 2]| -> Option<[f64; 2]> {
        let p = KernelParams::with_gap(z[0].exp(), z[1].exp()).ok()?;
        let (r, _) = residuals_at(&p, problem).ok()?;
        (r[0].is_finite() && r[1].is_finite()).then_some(r)
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);

    let mut z = clamp([seed.mu.max(1e-10).ln(), seed.one_minus_sigma.max(2.0 * MIN_SIGMA_GAP).ln()]);
    let mut r = eval(z)?;
    for iter in 0..=config.max_iters {
        let rn = norm(r);
        if rn <= config.newton_tol {
            return Some((
                Seed {
                    mu: z[0].exp(),
                    one_minus_sigma: z[1].exp(),
                },
                rn,
                iter,
            ));
        }
        if iter == config.max_iters {
            break;
        }
        // central-difference Jacobian
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * z[j].abs().max(1.0);
            let (mut zp, mut zm) = (z, z);
            zp[j] += h;
            zm[j] -= h;
            let (rp, rm) = (eval(zp)?, eval(zm)?);
            for i in 0..2 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !det.is_finite() || det == 0.0 {
            return None;
        }
        let mut dz = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        // keep log-space steps bounded
        let big = dz[0].abs().max(dz[1].abs());
        if big > 3.0 {
            dz = [dz[0] * 3.0 / big, dz[1] * 3.0 / big];
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step >= config.min_step {
            let trial = clamp([z[0] + step * dz[0], z[1] + step * dz[1]]);
            if let Some(rt) = eval(trial) {
                if norm(rt) < (1.0 - 1e-4 * step) * rn {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            step *= config.damping;
        }
        match accepted {
            Some((zt, rt)) => {
                z = zt;
                r = rt;
            }
            None => return None,
        }
    }
    None
}

/// Builds and verifies a full solution from a converged `(μ, 1 − σ)`.
fn assemble(root: Seed, residual_norm: f64, iters: usize, problem: &CanonicalProblem, config: &SolverConfig) -> Option<AdjointSolution> {
    let params = KernelParams::with_gap(root.mu, root.one_minus_sigma).ok()?;
    let (_, fx2) = residuals_at(&params, problem).ok()?;
    let t_f = 1.0 / fx2.sqrt();
    let (zeta, eta) = recover_at(&params, t_f, problem).ok()?;
    let sol = AdjointSolution {
        mu: root.mu,
        sigma: root.sigma(),
        one_minus_sigma: root.one_minus_sigma,
        t_f,
        zeta,
        eta,
        residual_norm,
        newton_iters: iters,
    };
    if (eta.norm() - 1.0).abs() > 1e-8 || (zeta.norm() - root.mu).abs() > 1e-8 {
        return None;
    }
    let (pos_err, vel_err) = sol.terminal_errors(problem).ok()?;
    (pos_err <= config.terminal_tol && vel_err <= config.terminal_tol).then_some(sol)
}

/// Solves the canonical problem.
pub fn solve(problem: &CanonicalProblem, config: &SolverConfig) -> Result<Solution> {
    solve_from(problem, config, None)
}

/// As [`solve`], trying `continuation` (typically a neighbouring solution
/// of a sweep) before the grid seeds.
pub fn solve_from(problem: &CanonicalProblem, config: &SolverConfig, continuation: Option<Seed>) -> Result<Solution> {
    if problem.is_collinear(config) {
        let v0 = problem.signed_speed();
        return Ok(Solution::Collinear {
            solution: one_dim::solve_one_dim(v0),
            v0,
        });
    }
    let seeds = seed_candidates(problem, config, continuation);
    let mut roots: Vec<AdjointSolution> = Vec::new();
    let mut best_residual = f64::INFINITY;
    for (attempt, seed) in seeds.into_iter().enumerate() {
        if attempt >= config.seed_attempts && !roots.is_empty() {
            break;
        }
        if let Some(r) = seed_residual(&seed, problem) {
            best_residual = best_residual.min(r);
        }
        let Some((root, rn, iters)) = newton(seed, problem, config) else {
            continue;
        };
        best_residual = best_residual.min(rn);
        let duplicate = roots.iter().any(|s| {
            (s.mu - root.mu).abs() <= 1e-6 * root.mu.max(1.0)
                && (s.one_minus_sigma.ln() - root.one_minus_sigma.ln()).abs() <= 1e-6
        });
        if duplicate {
            continue;
        }
        if let Some(sol) = assemble(root, rn, iters, problem, config) {
            roots.push(sol);
        }
    }
    roots
        .into_iter()
        .min_by(|a, b| a.t_f.total_cmp(&b.t_f))
        .map(Solution::Planar)
        .ok_or(Error::NoConvergence { best_residual })
}
