//! Exact solution of the collinear case, where `v0` is parallel to
//! `v_f = −1` and the control is a scalar bang-bang law.
//!
//! In normalized time `τ = t/t_f` the control is `u(τ) = η·sign(1 − λτ)`
//! with a single switch at `τ* = 1/λ`, and `λ` is a root of
//! `λ²(1 − v0) − 4λ + 2v0 + 2 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDimSolution {
    /// Switch parameter; the control flips sign at `τ = 1/λ`.
    pub lambda: f64,
    /// Sign of the control on the first arc.
    pub eta_sign: i8,
    pub t_f: f64,
    pub switch_fraction: f64,
    /// Constant-control (`v0 = 1`) or zero-time (`v0 = −1`) answer.
    pub degenerate: bool,
}

impl OneDimSolution {
    /// Time of the sign flip, `t_f/λ`.
    pub fn switch_time(&self) -> f64 {
        self.t_f * self.switch_fraction
    }

    fn from_lambda(v0: f64, lambda: f64) -> Option<Self> {
        let t_f = lambda * (v0 + 1.0).abs() / (2.0 - lambda).abs();
        if !t_f.is_finite() {
            return None;
        }
        let eta_sign = if (-1.0 - v0) * (2.0 - lambda) >= 0.0 { 1 } else { -1 };
        Some(Self {
            lambda,
            eta_sign,
            t_f,
            switch_fraction: 1.0 / lambda,
            degenerate: false,
        })
    }
}

/// Roots of `λ²(1 − v0) − 4λ + 2v0 + 2 = 0`, in cancellation-free form.
pub fn lambda_roots(v0: f64) -> Vec<f64> {
    let s = (2.0 + 2.0 * v0 * v0).sqrt();
    // (2 − s)/(1 − v0) rationalized; finite at v0 = 1
    let mut roots = vec![2.0 * (1.0 + v0) / (2.0 + s)];
    if v0 != 1.0 {
        roots.push((2.0 + s) / (1.0 - v0));
    }
    roots
}

/// Every bang-bang extremal with a switch inside the horizon.
///
/// For `v0 = −1` this is the zero-time answer plus the reversal with
/// `t_f = 4`, `u(τ) = sign(1 − 2τ)`, which satisfies the boundary
/// conditions but is not optimal.
pub fn one_dim_candidates(v0: f64) -> Vec<OneDimSolution> {
    if (v0 + 1.0).abs() <= DEGENERATE_EPS {
        return vec![
            zero_time_solution(),
            OneDimSolution {
                lambda: 2.0,
                eta_sign: 1,
                t_f: 4.0,
                switch_fraction: 0.5,
                degenerate: false,
            },
        ];
    }
    if (v0 - 1.0).abs() <= DEGENERATE_EPS {
        return vec![constant_control_solution()];
    }
    lambda_roots(v0)
        .into_iter()
        .filter(|&l| l > 1.0)
        .filter_map(|l| OneDimSolution::from_lambda(v0, l))
        .collect()
}

fn zero_time_solution() -> OneDimSolution {
    OneDimSolution {
        lambda: 2.0,
        eta_sign: 1,
        t_f: 0.0,
        switch_fraction: 0.5,
        degenerate: true,
    }
}

fn constant_control_solution() -> OneDimSolution {
    // λ = 1 puts the switch at the terminal instant: u ≡ −1 throughout
    OneDimSolution {
        lambda: 1.0,
        eta_sign: -1,
        t_f: 2.0,
        switch_fraction: 1.0,
        degenerate: true,
    }
}

/// Optimal solution for signed initial speed `v0` along the abscissa.
pub fn solve_one_dim(v0: f64) -> OneDimSolution {
    one_dim_candidates(v0)
        .into_iter()
        .min_by(|a, b| a.t_f.total_cmp(&b.t_f))
        .expect("a switching root with λ > 1 exists for every v0")
}

/// `(x, v, u)` at normalized time `tau ∈ [0, 1]`.
pub fn one_dim_state(sol: &OneDimSolution, v0: f64, tau: f64) -> (f64, f64, f64) {
    if sol.t_f == 0.0 {
        return (0.0, v0, 0.0);
    }
    let eta = f64::from(sol.eta_sign);
    let (l, t_f) = (sol.lambda, sol.t_f);
    let k = (l * tau - 1.0).abs();
    let x = v0 * tau * t_f + eta * t_f * t_f / (2.0 * l * l) * (k * (1.0 - l * tau) + 2.0 * l * tau - 1.0);
    let v = v0 + eta * t_f / l * (1.0 - k);
    // a switch at τ = 1 (constant control) never flips
    let u = if tau < sol.switch_fraction || sol.switch_fraction >= 1.0 { eta } else { -eta };
    (x, v, u)
}

/// Branch of the switching curve `x = ∓v²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveBranch {
    /// `x = −v²/2`
    Upper,
    /// `x = +v²/2`
    Lower,
}

pub fn switching_curve(v: f64, branch: CurveBranch) -> f64 {
    match branch {
        CurveBranch::Upper => -0.5 * v * v,
        CurveBranch::Lower => 0.5 * v * v,
    }
}

/// Initial speeds `(v0⁺, v0⁻)` whose optimal return takes exactly `t_f`.
pub fn velocities_for_time(t_f: f64) -> Result<(f64, f64)> {
    if !(t_f >= 2.0) {
        return Err(Error::TimeBelowMinimum { t_f });
    }
    let plus = -1.0 + t_f - (2.0 * t_f * t_f - 4.0 * t_f).sqrt();
    let minus = -1.0 - t_f + (2.0 * t_f * t_f + 4.0 * t_f).sqrt();
    Ok((plus, minus))
}

/// The speed above zero that shares the zero-speed optimal time `1 + √2`.
pub fn v_star() -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    -sqrt2 - 2.0 + (10.0 + 8.0 * sqrt2).sqrt()
}
