//! Sampling, control angles, speed regimes and forward verification of
//! solved trajectories.

use serde::{Deserialize, Serialize};

use crate::bvp::{CanonicalProblem, Solution, TARGET_VELOCITY};
use crate::error::Result;
use crate::vector::Vector2;

/// Dead-band on `(v, u)` below which the regime is treated as undetermined.
pub const REGIME_DEAD_BAND: f64 = 1e-12;

/// Time resolution of regime boundaries.
pub const REGIME_TIME_TOL: f64 = 1e-9;

/// Tolerance on polar angles, in radians.
const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vector2,
    pub v: Vector2,
    pub u: Vector2,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedExtremum {
    pub t: f64,
    pub speed: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Accelerating,
    Decelerating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSegment {
    pub start: f64,
    pub end: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeProfile {
    pub segments: Vec<RegimeSegment>,
    pub extrema: Vec<SpeedExtremum>,
}

impl RegimeProfile {
    pub fn initial(&self) -> Option<Regime> {
        self.segments.first().map(|s| s.regime)
    }

    pub fn terminal(&self) -> Option<Regime> {
        self.segments.last().map(|s| s.regime)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub samples: Vec<TrajectorySample>,
    pub terminal_position_error: f64,
    pub terminal_velocity_error: f64,
    pub phi: f64,
    pub psi: f64,
    pub polar_angle_monotone: bool,
    pub in_angle_sector: bool,
    pub speed_extrema: Vec<SpeedExtremum>,
}

pub fn control_at(sol: &Solution, t: f64) -> Vector2 {
    sol.control_at(t)
}

pub fn state_at(sol: &Solution, problem: &CanonicalProblem, t: f64) -> Result<(Vector2, Vector2)> {
    sol.state_at(problem, t)
}

/// Direction angles of the initial and final control, in `[0, 2π)`.
pub fn control_angles(sol: &Solution) -> (f64, f64) {
    let t_f = sol.t_f();
    (sol.control_at(0.0).angle(), sol.control_at(t_f).angle())
}

fn uniform_times(t_f: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|k| if k + 1 == n { t_f } else { t_f * k as f64 / (n - 1) as f64 })
        .collect()
}

fn wrap_pi(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Polar angle of interior samples is monotone after shortest-arc unwrapping.
fn polar_monotone(samples: &[TrajectorySample]) -> bool {
    let interior: Vec<f64> = samples
        .iter()
        .skip(1)
        .take(samples.len().saturating_sub(2))
        .filter(|s| s.x.norm() > 0.0)
        .map(|s| s.x.y.atan2(s.x.x))
        .collect();
    let mut unwrapped = Vec::with_capacity(interior.len());
    for &a in &interior {
        match unwrapped.last() {
            None => unwrapped.push(a),
            Some(&prev) => unwrapped.push(prev + wrap_pi(a - prev)),
        }
    }
    let diffs: Vec<f64> = unwrapped.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.iter().all(|&d| d <= ANGLE_TOL) || diffs.iter().all(|&d| d >= -ANGLE_TOL)
}

/// Every sample lies in the closed sector between the positive abscissa and
/// the direction `alpha`. Endpoints are the origin by construction and are skipped; their computed
/// values carry roundoff only.
fn in_sector(samples: &[TrajectorySample], alpha: f64) -> bool {
    let n = samples.len();
    samples.iter().skip(1).take(n.saturating_sub(2)).all(|s| {
        if s.x.norm() == 0.0 {
            return true;
        }
        let th = s.x.y.atan2(s.x.x);
        th >= -ANGLE_TOL && th <= alpha + ANGLE_TOL
    })
}

pub fn sample_trajectory(sol: &Solution, problem: &CanonicalProblem, n: usize) -> Result<TrajectoryReport> {
    let t_f = sol.t_f();
    let mut samples = Vec::with_capacity(n.max(2));
    for t in uniform_times(t_f, n) {
        if t_f == 0.0 && !samples.is_empty() {
            break;
        }
        let (x, v) = sol.state_at(problem, t)?;
        samples.push(TrajectorySample {
            t,
            x,
            v,
            u: sol.control_at(t),
            speed: v.norm(),
        });
    }
    let (x_end, v_end) = sol.state_at(problem, t_f)?;
    let (phi, psi) = control_angles(sol);
    let extrema = if t_f > 0.0 {
        speed_regimes(sol, problem, n.max(16))?.extrema
    } else {
        Vec::new()
    };
    Ok(TrajectoryReport {
        polar_angle_monotone: polar_monotone(&samples),
        in_angle_sector: in_sector(&samples, problem.alpha),
        samples,
        terminal_position_error: x_end.norm(),
        terminal_velocity_error: (v_end - TARGET_VELOCITY).norm(),
        phi,
        psi,
        speed_extrema: extrema,
    })
}

fn power(sol: &Solution, problem: &CanonicalProblem, t: f64) -> Result<f64> {
    let (_, v) = sol.state_at(problem, t)?;
    Ok(v.dot(sol.control_at(t)))
}

fn classify(g: f64) -> Option<Regime> {
    if g > REGIME_DEAD_BAND {
        Some(Regime::Accelerating)
    } else if g < -REGIME_DEAD_BAND {
        Some(Regime::Decelerating)
    } else {
        None
    }
}

/// Segments `[0, t_f]` by the sign of `(v, u)`. Neutral samples inherit the
/// regime of the nearest determined sample that follows them (or precedes
/// them at the end of the horizon).
pub fn speed_regimes(sol: &Solution, problem: &CanonicalProblem, n: usize) -> Result<RegimeProfile> {
    let t_f = sol.t_f();
    let times = uniform_times(t_f, n.max(16));
    let mut regimes = Vec::with_capacity(times.len());
    for &t in &times {
        regimes.push(classify(power(sol, problem, t)?));
    }
    let mut next = None;
    for r in regimes.iter_mut().rev() {
        match r {
            Some(v) => next = Some(*v),
            None => *r = next,
        }
    }
    let mut prev = None;
    for r in regimes.iter_mut() {
        match r {
            Some(v) => prev = Some(*v),
            None => *r = prev,
        }
    }
    let Some(first) = regimes[0] else {
        return Ok(RegimeProfile {
            segments: Vec::new(),
            extrema: Vec::new(),
        });
    };

    let mut segments = vec![RegimeSegment {
        start: 0.0,
        end: t_f,
        regime: first,
    }];
    let mut extrema = Vec::new();
    for k in 1..times.len() {
        let (a, b) = (regimes[k - 1].unwrap(), regimes[k].unwrap());
        if a == b {
            continue;
        }
        let (mut lo, mut hi) = (times[k - 1], times[k]);
        while hi - lo > REGIME_TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if classify(power(sol, problem, mid)?) == Some(a) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tb = 0.5 * (lo + hi);
        let (_, v) = sol.state_at(problem, tb)?;
        extrema.push(SpeedExtremum {
            t: tb,
            speed: v.norm(),
            kind: match a {
                Regime::Decelerating => ExtremumKind::Min,
                Regime::Accelerating => ExtremumKind::Max,
            },
        });
        segments.last_mut().unwrap().end = tb;
        segments.push(RegimeSegment {
            start: tb,
            end: t_f,
            regime: b,
        });
    }
    Ok(RegimeProfile { segments, extrema })
}

/// Classical RK4 on `ẋ = v`, `v̇ = u(t)` from `(0, v0)`; returns terminal
/// errors `(|x(t_f)|, |v(t_f) − v_f|)`.
///
/// The bang-bang control of the collinear branch jumps at the switch, so
/// there the step grid is split at the switch time and each phase is
/// integrated with its own constant control.
pub fn forward_verify(problem: &CanonicalProblem, sol: &Solution, steps: usize) -> (f64, f64) {
    let t_f = sol.t_f();
    let (x, v) = match sol {
        Solution::Collinear { solution, .. } if solution.switch_fraction > 0.0 && solution.switch_fraction < 1.0 => {
            let ts = solution.switch_time();
            let n1 = ((steps as f64 * solution.switch_fraction).round() as usize).clamp(1, steps.max(2) - 1);
            let u = sol.control_at(0.0);
            let (x1, v1) = rk4_span(|_| u, Vector2::ZERO, problem.v0(), 0.0, ts, n1);
            rk4_span(|_| -u, x1, v1, ts, t_f, steps.max(2) - n1)
        }
        _ => rk4(|t| sol.control_at(t), problem.v0(), t_f, steps),
    };
    (x.norm(), (v - TARGET_VELOCITY).norm())
}

/// Fixed-step RK4 for the double integrator from the origin.
pub fn rk4<F: Fn(f64) -> Vector2>(control: F, v0: Vector2, t_f: f64, steps: usize) -> (Vector2, Vector2) {
    rk4_span(control, Vector2::ZERO, v0, 0.0, t_f, steps)
}

/// Fixed-step RK4 for the double integrator over `[t0, t1]`.
pub fn rk4_span<F: Fn(f64) -> Vector2>(
    control: F,
    x0: Vector2,
    v0: Vector2,
    t0: f64,
    t1: f64,
    steps: usize,
) -> (Vector2, Vector2) {
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let (mut x, mut v) = (x0, v0);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let u1 = control(t);
        let u2 = control(t + 0.5 * h);
        let u3 = u2;
        let u4 = control(t + h);
        let k1x = v;
        let k2x = v + u1 * (0.5 * h);
        let k3x = v + u2 * (0.5 * h);
        let k4x = v + u3 * h;
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        v += (u1 + u2 * 2.0 + u3 * 2.0 + u4) * (h / 6.0);
    }
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::{solve, SolverConfig};
    use std::f64::consts::PI;

    fn solved(speed: f64, alpha: f64) -> (CanonicalProblem, Solution) {
        let p = CanonicalProblem::new(speed, alpha).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        (p, s)
    }

    #[test]
    fn control_starts_at_eta_and_is_unit() {
        let (_, s) = solved(3.0, 0.25 * PI);
        let a = s.planar().unwrap();
        assert!((s.control_at(0.0) - a.eta).norm() < 1e-14);
        for k in 0..1000 {
            let t = a.t_f * k as f64 / 999.0;
            assert!((s.control_at(t).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_and_midpoint() {
        let (p, s) = solved(3.0, 0.25 * PI);
        let (x0, v0) = s.state_at(&p, 0.0).unwrap();
        assert!(x0.norm() < 1e-15 && (v0 - p.v0()).norm() < 1e-15);
        let r = sample_trajectory(&s, &p, 200).unwrap();
        assert!(r.terminal_position_error < 1e-8 && r.terminal_velocity_error < 1e-8);
        let half = 0.5 * s.t_f();
        let (x_rk, v_rk) = rk4(|t| s.control_at(t), p.v0(), half, 10_000);
        let (x, v) = s.state_at(&p, half).unwrap();
        assert!((x - x_rk).norm() < 1e-6 && (v - v_rk).norm() < 1e-6);
    }

    #[test]
    fn forward_verification() {
        for (speed, alpha) in [(0.0, 0.0), (3.0, 0.5 * PI)] {
            let (p, s) = solved(speed, alpha);
            let (ex, ev) = forward_verify(&p, &s, 10_000);
            assert!(ex < 1e-6 && ev < 1e-6, "{speed} {alpha}: {ex} {ev}");
        }
    }

    #[test]
    fn rk4_fourth_order() {
        let (p, s) = solved(1.0, 0.5 * PI);
        let (a, b) = forward_verify(&p, &s, 100);
        let (c, d) = forward_verify(&p, &s, 400);
        let (coarse, fine) = (a.max(b), c.max(d));
        assert!(coarse / fine >= 8.0, "{coarse} {fine}");
    }

    #[test]
    fn sample_layout() {
        let (p, s) = solved(1.3, 0.75 * PI);
        let r = sample_trajectory(&s, &p, 64).unwrap();
        assert_eq!(r.samples.len(), 64);
        assert_eq!(r.samples[0].t, 0.0);
        assert_eq!(r.samples[63].t, s.t_f());
        assert!(r.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn figure_panels_geometry() {
        let mut cases: Vec<(f64, f64)> = [0.1, 0.25, 0.5, 0.75, 0.9].iter().map(|a| (3.0, a * PI)).collect();
        cases.extend([0.3, 0.7, 1.0, 1.3].iter().map(|&v| (v, 0.75 * PI)));
        for (speed, alpha) in cases {
            let (p, s) = solved(speed, alpha);
            let r = sample_trajectory(&s, &p, 400).unwrap();
            assert!(r.polar_angle_monotone, "{speed} {alpha}");
            assert!(r.in_angle_sector, "{speed} {alpha}");
            assert!(r.phi >= alpha + PI - 1e-9 && r.phi <= 2.0 * PI, "{} {}", r.phi, alpha);
            assert!(r.psi >= alpha - 1e-9 && r.psi <= PI + 1e-9, "{} {}", r.psi, alpha);
        }
    }

    #[test]
    fn collinear_sector_is_vacuous() {
        let (p, s) = solved(2.0, 0.0);
        let r = sample_trajectory(&s, &p, 50).unwrap();
        assert!(r.in_angle_sector);
    }

    #[test]
    fn constant_control_angles() {
        let (_, s) = solved(1.0, 0.0);
        let (phi, psi) = control_angles(&s);
        assert!((phi - PI).abs() < 1e-15 && (psi - PI).abs() < 1e-15);
    }

    #[test]
    fn unit_speed_has_single_minimum() {
        let (p, s) = solved(1.0, 0.0);
        let prof = speed_regimes(&s, &p, 64).unwrap();
        assert_eq!(prof.initial(), Some(Regime::Decelerating));
        assert_eq!(prof.terminal(), Some(Regime::Accelerating));
        assert_eq!(prof.extrema.len(), 1);
        assert_eq!(prof.extrema[0].kind, ExtremumKind::Min);
        assert!((prof.extrema[0].t - 1.0).abs() < 1e-8);
    }

    #[test]
    fn one_dim_peak_at_switch() {
        let (p, s) = solved(0.5, 0.0);
        let prof = speed_regimes(&s, &p, 64).unwrap();
        let Solution::Collinear { solution, .. } = s else { panic!() };
        assert_eq!(prof.initial(), Some(Regime::Accelerating));
        assert_eq!(prof.extrema[0].kind, ExtremumKind::Max);
        assert!((prof.extrema[0].t - solution.switch_time()).abs() < 1e-8);
        // v passes through zero on its way to −1
        assert_eq!(prof.extrema.len(), 2);
        assert_eq!(prof.extrema[1].kind, ExtremumKind::Min);
        assert!(prof.extrema[1].speed < 1e-8);
    }

    #[test]
    fn regime_boundaries_are_zeros() {
        for (speed, alpha) in [(0.5, 0.3 * PI), (1.1, 0.6 * PI), (3.0, 0.9 * PI)] {
            let (p, s) = solved(speed, alpha);
            let prof = speed_regimes(&s, &p, 64).unwrap();
            for w in prof.segments.windows(2) {
                assert_ne!(w[0].regime, w[1].regime);
                assert_eq!(w[0].end, w[1].start);
            }
            for e in &prof.extrema {
                let g = power(&s, &p, e.t).unwrap();
                assert!(g.abs() < 1e-7, "{speed} {alpha}: {g}");
            }
            let (phi, _) = control_angles(&s);
            let accel = prof.initial() == Some(Regime::Accelerating);
            assert_eq!(accel, phi >= alpha + 1.5 * PI, "{speed} {alpha} {phi}");
            assert!(!(accel && prof.terminal() == Some(Regime::Decelerating)));
        }
    }
}
