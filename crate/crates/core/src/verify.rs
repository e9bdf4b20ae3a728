//! Acceptance panels. Each criterion runs its full panel and reports the
//! worst measured quantity against its threshold.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::bvp::{solve, CanonicalProblem, Solution, SolverConfig};
use crate::kernels::{self, KernelParams, SERIES_THRESHOLD};
use crate::normalize::{dual_parameters, dualize};
use crate::one_dim::{one_dim_candidates, solve_one_dim, v_star, velocities_for_time};
use crate::oracle::{bang_oracle_1d, direct_oracle, grid_oracle};
use crate::quadrature::integrate;
use crate::trajectory::{control_angles, forward_verify, sample_trajectory, speed_regimes, Regime};
use crate::vector::Vector2;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {} [{}] {}: {} ({:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Cheap closed-form and boundary checks only (criteria 1–4, 6).
    pub quick: bool,
    /// Include the oracle comparison (criterion 8).
    pub oracle: bool,
}

pub const ALL_CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

pub fn selected(opts: VerifyOptions) -> Vec<u8> {
    ALL_CRITERIA
        .into_iter()
        .filter(|&id| match id {
            8 => opts.oracle && !opts.quick,
            5 | 7 | 9 => !opts.quick,
            _ => true,
        })
        .collect()
}

pub fn run(opts: VerifyOptions) -> Vec<CriterionResult> {
    selected(opts).into_iter().map(run_criterion).collect()
}

pub fn run_criterion(id: u8) -> CriterionResult {
    let start = Instant::now();
    let (title, outcome): (&'static str, Outcome) = match id {
        1 => ("1D closed-form anchors", one_dim_anchors()),
        2 => ("1D oracle equivalence", one_dim_oracle()),
        3 => ("kernel identity suite", kernel_identities()),
        4 => ("2D boundary limits", boundary_limits()),
        5 => ("terminal conditions", terminal_suite()),
        6 => ("duality", duality()),
        7 => ("monotonicity and geometry", geometry()),
        8 => ("oracle agreement", oracle_agreement()),
        9 => ("curve intersections", curve_intersections()),
        _ => ("unknown", Outcome::fail(format!("no criterion {id}"))),
    };
    CriterionResult {
        id,
        title,
        passed: outcome.passed,
        detail: outcome.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn fail(detail: String) -> Self {
        Self { passed: false, detail }
    }
}

/// Collects named worst-case measurements against thresholds.
#[derive(Default)]
struct Checks {
    items: Vec<(String, f64, f64)>,
    failures: Vec<String>,
}

impl Checks {
    fn max(&mut self, name: &str, worst: f64, limit: f64) {
        self.items.push((name.to_string(), worst, limit));
    }

    fn flag(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn outcome(self) -> Outcome {
        let mut passed = self.failures.is_empty();
        let mut parts = Vec::new();
        for (name, worst, limit) in &self.items {
            let ok = *worst <= *limit;
            passed &= ok;
            parts.push(format!("{name} {worst:.2e} (<= {limit:.0e}{})", if ok { "" } else { " FAILED" }));
        }
        let shown = self.failures.len().min(4);
        for f in &self.failures[..shown] {
            parts.push(f.clone());
        }
        if self.failures.len() > shown {
            parts.push(format!("{} more failures", self.failures.len() - shown));
        }
        Outcome {
            passed,
            detail: parts.join("; "),
        }
    }
}

fn solve_case(speed: f64, alpha: f64) -> std::result::Result<(CanonicalProblem, Solution), String> {
    let p = CanonicalProblem::new(speed, alpha).map_err(|e| e.to_string())?;
    let s = solve(&p, &SolverConfig::default()).map_err(|e| format!("({speed}, {alpha:.4}): {e}"))?;
    Ok((p, s))
}

/// `n` interior angles `π(k+1)/(n+1)`.
fn interior_alphas(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * (k + 1) as f64 / (n + 1) as f64).collect()
}

fn one_dim_anchors() -> Outcome {
    let mut c = Checks::default();
    let t0 = solve_one_dim(0.0).t_f;
    c.max("|t_f(0) - (1+sqrt2)|", (t0 - (1.0 + 2f64.sqrt())).abs(), 1e-10);
    let s = solve_one_dim(1.0);
    c.max("|t_f(1) - 2|", (s.t_f - 2.0).abs(), 1e-10);
    c.flag(s.switch_fraction >= 1.0, || "v0 = 1 is not constant control".into());
    c.max("|t_f(-1)|", solve_one_dim(-1.0).t_f.abs(), 1e-10);
    let vs = -(2f64.sqrt()) - 2.0 + (10.0 + 8.0 * 2f64.sqrt()).sqrt();
    c.max("|v* - formula|", (v_star() - vs).abs(), 1e-10);
    match velocities_for_time(2.0) {
        Ok((a, b)) => c.max("|velocities_for_time(2) - (1, 1)|", (a - 1.0).abs().max((b - 1.0).abs()), 1e-10),
        Err(e) => c.flag(false, || format!("velocities_for_time(2): {e}")),
    }
    c.outcome()
}

fn one_dim_oracle() -> Outcome {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    let mut worst_switch: f64 = 0.0;
    for k in 0..61 {
        let v0 = -3.0 + 0.1 * k as f64;
        if (v0 - 1.0).abs() < 1e-12 {
            continue;
        }
        let s = solve_one_dim(v0);
        let (t, ts) = bang_oracle_1d(v0);
        worst = worst.max((s.t_f - t).abs());
        if s.t_f > 0.0 {
            worst_switch = worst_switch.max((s.switch_time() - ts).abs());
        }
    }
    c.max("max |t_f - oracle|", worst, 1e-10);
    c.max("max |t_switch - oracle|", worst_switch, 1e-10);
    c.outcome()
}

const KERNEL_RHOS: [f64; 4] = [0.1, 0.5, 1.0, 3.0];
const KERNEL_SIGMAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];
const KERNEL_TS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

fn kernel_identities() -> Outcome {
    let mut c = Checks::default();
    let h = 1e-6;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let (mut fd, mut quad, mut unit): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for rho in KERNEL_RHOS {
        for sigma in KERNEL_SIGMAS {
            let Ok(kp) = KernelParams::new(rho, sigma) else {
                c.flag(false, || format!("invalid params {rho} {sigma}"));
                continue;
            };
            for t in KERNEL_TS {
                let mut eval = || -> crate::Result<()> {
                    let r = kernels::radical_r(&kp, t)?;
                    let dv = (kernels::log_v(&kp, t + h)? - kernels::log_v(&kp, t - h)?) / (2.0 * h);
                    let kp1 = kernels::kernels(&kp, t + h)?;
                    let km1 = kernels::kernels(&kp, t - h)?;
                    let k0 = kernels::kernels(&kp, t)?;
                    let d = |a: f64, b: f64| (a - b) / (2.0 * h);
                    fd = fd
                        .max(rel(dv * r, rho))
                        .max(rel(d(kp1.v_xi, km1.v_xi), -t / r))
                        .max(rel(d(kp1.v_eta, km1.v_eta), 1.0 / r))
                        .max(rel(d(kp1.x_xi, km1.x_xi), k0.v_xi))
                        .max(rel(d(kp1.x_eta, km1.x_eta), k0.v_eta));

                    let rr = |u: f64| (rho * rho * u * u - 2.0 * sigma * rho * u + 1.0).sqrt();
                    let q = integrate(
                        |u| {
                            let ri = 1.0 / rr(u);
                            [-u * ri, ri, (t - u) * (-u) * ri, (t - u) * ri]
                        },
                        0.0,
                        t,
                        &[sigma / rho],
                        1e-13,
                    );
                    let got = [k0.v_xi, k0.v_eta, k0.x_xi, k0.x_eta];
                    for i in 0..4 {
                        quad = quad.max((got[i] - q[i]).abs());
                    }

                    // concrete ξ, η with |η| = 1 and (ξ, η) = ρσ
                    let eta = Vector2::from_angle(0.7);
                    let xi = Vector2::from_angle(0.7 + sigma.acos()) * rho;
                    let u = (eta - xi * t) / r;
                    unit = unit.max((u.norm() - 1.0).abs());
                    Ok(())
                };
                if let Err(e) = eval() {
                    c.flag(false, || format!("({rho}, {sigma}, {t}): {e}"));
                }
            }
        }
    }
    c.max("finite-difference identities (rel)", fd, 1e-6);
    c.max("quadrature equivalence (abs)", quad, 1e-9);
    c.max("|u| - 1", unit, 1e-12);

    let mut cross: f64 = 0.0;
    let mut eta_zeta: f64 = 0.0;
    for sigma in KERNEL_SIGMAS {
        let kp = KernelParams::new(SERIES_THRESHOLD, sigma).expect("valid");
        let s = kernels::kernels_series(&kp, 1.0);
        match kernels::kernels_closed(&kp, 1.0) {
            Ok(k) => {
                cross = cross
                    .max((s.v_xi - k.v_xi).abs())
                    .max((s.v_eta - k.v_eta).abs())
                    .max((s.x_xi - k.x_xi).abs())
                    .max((s.x_eta - k.x_eta).abs());
            }
            Err(e) => c.flag(false, || format!("closed kernels at threshold: {e}")),
        }
        match kernels::coefficient_paths(&kp) {
            Ok((a, b)) => {
                for i in 0..3 {
                    cross = cross.max((a[i] - b[i]).abs());
                }
            }
            Err(e) => c.flag(false, || format!("coefficients at threshold: {e}")),
        }
        for mu in [0.0, 0.05, 0.1, 0.5, 1.0, 3.0, 10.0] {
            if let Ok(cs) = kernels::coefficients(mu, sigma) {
                eta_zeta = eta_zeta.max((cs.a_eta - cs.b_zeta).abs());
            }
        }
    }
    c.max("series/closed crossover", cross, 1e-9);
    c.max("|a_eta - b_zeta|", eta_zeta, 0.0);
    c.outcome()
}

fn boundary_limits() -> Outcome {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for speed in [0.5, 1.0, 3.0] {
        for (alpha, v0) in [(1e-3, speed), (PI - 1e-3, -speed)] {
            let expected = if v0 == -1.0 {
                // t_f → 4, the nonoptimal reversal, not the zero-time optimum
                one_dim_candidates(-1.0)
                    .into_iter()
                    .map(|s| s.t_f)
                    .fold(0.0, f64::max)
            } else {
                solve_one_dim(v0).t_f
            };
            match solve_case(speed, alpha) {
                Ok((_, s)) => worst = worst.max((s.t_f() - expected).abs()),
                Err(e) => c.flag(false, || e),
            }
        }
    }
    c.max("max |t_f - 1D t_f| near alpha = 0, pi", worst, 1e-2);
    match solve_case(1.0, 0.999 * PI) {
        Ok((_, s)) => c.max("|t_f(1, 0.999pi) - 4|", (s.t_f() - 4.0).abs(), 0.1),
        Err(e) => c.flag(false, || e),
    }
    c.outcome()
}

pub const TERMINAL_SPEEDS: [f64; 5] = [0.1, 0.5, 1.0, 1.3, 3.0];

fn terminal_suite() -> Outcome {
    let mut c = Checks::default();
    let (mut closed, mut rk, mut unit): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut cases = 0;
    for speed in TERMINAL_SPEEDS {
        for k in 0..33 {
            let alpha = PI * k as f64 / 32.0;
            let (p, s) = match solve_case(speed, alpha) {
                Ok(x) => x,
                Err(e) => {
                    c.flag(false, || e);
                    continue;
                }
            };
            cases += 1;
            match s.state_at(&p, s.t_f()) {
                Ok((x, v)) => closed = closed.max(x.norm()).max((v - Vector2::new(-1.0, 0.0)).norm()),
                Err(e) => c.flag(false, || format!("({speed}, {alpha:.4}): {e}")),
            }
            let (ex, ev) = forward_verify(&p, &s, 10_000);
            rk = rk.max(ex).max(ev);
            if s.t_f() > 0.0 {
                for i in 0..1000 {
                    let t = s.t_f() * i as f64 / 999.0;
                    unit = unit.max((s.control_at(t).norm() - 1.0).abs());
                }
            }
        }
    }
    c.flag(cases == 165, || format!("only {cases} of 165 cases solved"));
    c.max("closed-form terminal error", closed, 1e-8);
    c.max("RK4(1e4) terminal error", rk, 1e-6);
    c.max("| |u| - 1 |", unit, 1e-12);
    c.outcome()
}

fn duality() -> Outcome {
    let mut c = Checks::default();
    let (mut inv, mut time, mut mapped): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for speed in [2.0, 3.0, 5.0] {
        for alpha in [0.25 * PI, 0.5 * PI, 0.75 * PI] {
            let (p, sp) = match solve_case(speed, alpha) {
                Ok(x) => x,
                Err(e) => {
                    c.flag(false, || e);
                    continue;
                }
            };
            let Ok((d, _)) = dualize(&p) else {
                c.flag(false, || format!("dualize({speed})"));
                continue;
            };
            let sd = match solve(&d, &SolverConfig::default()) {
                Ok(s) => s,
                Err(e) => {
                    c.flag(false, || format!("dual ({}, {alpha:.4}): {e}", d.speed));
                    continue;
                }
            };
            time = time.max((sd.t_f() - sp.t_f() / speed).abs());
            if let (Some(a), Some(b)) = (sp.planar(), sd.planar()) {
                inv = inv.max((a.mu - b.mu).abs()).max((a.sigma - b.sigma).abs());
                let (mu, sigma) = dual_parameters(a);
                mapped = mapped.max((mu - b.mu).abs()).max((sigma - b.sigma).abs());
            }
        }
    }
    c.max("|t_f' - t_f/speed|", time, 1e-8);
    c.max("|mu' - mu|, |sigma' - sigma|", inv, 1e-8);
    let mut o = c.outcome();
    o.detail
        .push_str(&format!("; time-reversed correspondence mu' = mu/|eta - zeta| holds to {mapped:.2e}"));
    o
}

pub const FIG1_ALPHAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
pub const FIG2_SPEEDS: [f64; 4] = [0.3, 0.7, 1.0, 1.3];
pub const FIG3_SPEEDS: [f64; 5] = [0.5, 0.7, 0.9, 1.0, 3.0];
pub const FIG4_SPEEDS: [f64; 6] = [0.3, 0.7, 0.9, 1.0, 1.3, 3.0];
pub const FIG5_SPEEDS: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 1.1, 1.2, 1.3];
pub const FIG6_SPEEDS: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 1.0];

/// Tolerance for comparing equal `t_f` values along α (speed 0 is flat).
const FLAT_TOL: f64 = 1e-10;
const ANGLE_SLACK: f64 = 1e-9;

fn geometry() -> Outcome {
    let mut c = Checks::default();
    let alphas = interior_alphas(64);

    let mut worst_drop: f64 = 0.0;
    for speed in FIG5_SPEEDS {
        let mut prev: Option<f64> = None;
        for &alpha in &alphas {
            match solve_case(speed, alpha) {
                Ok((_, s)) => {
                    if let Some(p) = prev {
                        worst_drop = worst_drop.max(p - s.t_f());
                    }
                    prev = Some(s.t_f());
                }
                Err(e) => c.flag(false, || e),
            }
        }
    }
    c.max("largest decrease of t_f along alpha", worst_drop, FLAT_TOL);

    let mut panel: Vec<(f64, f64)> = FIG1_ALPHAS.iter().map(|a| (3.0, a * PI)).collect();
    panel.extend(FIG2_SPEEDS.iter().map(|&v| (v, 0.75 * PI)));
    for (speed, alpha) in panel {
        match solve_case(speed, alpha).and_then(|(p, s)| sample_trajectory(&s, &p, 1000).map_err(|e| e.to_string())) {
            Ok(r) => {
                c.flag(r.in_angle_sector, || format!("({speed}, {alpha:.4}) leaves the sector"));
                c.flag(r.polar_angle_monotone, || format!("({speed}, {alpha:.4}) polar angle not monotone"));
            }
            Err(e) => c.flag(false, || e),
        }
    }

    let mut speeds: Vec<f64> = FIG3_SPEEDS.to_vec();
    speeds.extend(FIG4_SPEEDS);
    speeds.sort_by(f64::total_cmp);
    speeds.dedup();
    let (mut phi_out, mut psi_out): (f64, f64) = (0.0, 0.0);
    let mut accel_decel = 0;
    for &speed in &speeds {
        for &alpha in &alphas {
            let (p, s) = match solve_case(speed, alpha) {
                Ok(x) => x,
                Err(e) => {
                    c.flag(false, || e);
                    continue;
                }
            };
            let (phi, psi) = control_angles(&s);
            if FIG3_SPEEDS.contains(&speed) {
                phi_out = phi_out.max(alpha + PI - phi).max(phi - 2.0 * PI);
            }
            if FIG4_SPEEDS.contains(&speed) {
                psi_out = psi_out.max(alpha - psi).max(psi - PI);
            }
            match speed_regimes(&s, &p, 64) {
                Ok(r) => {
                    if r.initial() == Some(Regime::Accelerating) && r.terminal() == Some(Regime::Decelerating) {
                        accel_decel += 1;
                    }
                }
                Err(e) => c.flag(false, || e.to_string()),
            }
        }
    }
    c.max("phi outside [alpha + pi, 2pi] by", phi_out, ANGLE_SLACK);
    c.max("psi outside [alpha, pi] by", psi_out, ANGLE_SLACK);
    c.flag(accel_decel == 0, || format!("{accel_decel} cases accelerate first and decelerate last"));
    c.outcome()
}

pub const ORACLE_SPEEDS: [f64; 5] = [0.3, 0.7, 1.3, 2.0, 3.0];
pub const ORACLE_ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const DIRECT_TOL: f64 = 1e-9;

fn oracle_agreement() -> Outcome {
    let mut cases = Vec::new();
    for speed in ORACLE_SPEEDS {
        for a in ORACLE_ALPHAS {
            cases.push((speed, a * PI));
        }
    }
    let results: Vec<std::result::Result<(f64, f64, f64, f64), String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|&(speed, alpha)| {
                scope.spawn(move || {
                    let (p, s) = solve_case(speed, alpha)?;
                    let g = grid_oracle(&p, 100, 100, 20.0);
                    // a loose feasibility tolerance lets the relaxed problem
                    // undercut the optimum, so the bound is taken tight
                    let d = direct_oracle(&p, 128, DIRECT_TOL).map_err(|e| e.to_string())?;
                    Ok((s.t_f(), g.t_f, g.t_f_resolution, d.t_f))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("panic".into()))).collect()
    });
    let mut c = Checks::default();
    let (mut grid_excess, mut gap, mut below): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut worst_grid: f64 = 0.0;
    for (&(speed, alpha), r) in cases.iter().zip(results) {
        match r {
            Ok((t, g, res, d)) => {
                grid_excess = grid_excess.max((t - g).abs() - res);
                worst_grid = worst_grid.max((t - g).abs());
                below = below.max(t - d);
                gap = gap.max((d - t) / t);
            }
            Err(e) => c.flag(false, || format!("({speed}, {alpha:.4}): {e}")),
        }
    }
    c.max("|t_f - grid| beyond grid resolution", grid_excess, 0.0);
    c.max("t_f above direct(128)", below, 0.0);
    c.max("relative gap to direct(128)", gap, 0.02);
    let mut o = c.outcome();
    o.detail.push_str(&format!("; max |t_f - grid| {worst_grid:.2e}"));
    o
}

fn curve_intersections() -> Outcome {
    let mut c = Checks::default();
    let alphas: Vec<f64> = (0..=64).map(|k| 0.5 * PI * k as f64 / 64.0).collect();
    let mut curves = Vec::new();
    for speed in FIG6_SPEEDS {
        let mut tf = Vec::with_capacity(alphas.len());
        for &alpha in &alphas {
            match solve_case(speed, alpha) {
                Ok((_, s)) => tf.push(s.t_f()),
                Err(e) => {
                    c.flag(false, || e);
                    tf.push(f64::NAN);
                }
            }
        }
        curves.push((speed, tf));
    }
    let mut pairs = 0;
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            pairs += 1;
            let d: Vec<f64> = curves[i].1.iter().zip(&curves[j].1).map(|(a, b)| a - b).collect();
            let crosses = d.windows(2).any(|w| w[0] * w[1] < 0.0);
            let (a, b) = (curves[i].0, curves[j].0);
            c.flag(crosses, || format!("speeds {a} and {b} do not cross"));
        }
    }
    let mut o = c.outcome();
    if o.detail.is_empty() {
        o.detail = format!("all {pairs} pairs change sign");
    }
    o
}
