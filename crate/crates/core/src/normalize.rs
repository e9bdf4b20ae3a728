//! Reduction of a general coincident-endpoint problem to the canonical one,
//! the inverse map, and the speed-inversion duality.
//!
//! A [`NormalizationMap`] takes canonical quantities to physical ones:
//!
//! ```text
//! t = t0 + T·τ              (τ ↦ τ_f − τ when dualized)
//! x = origin + L·B x̃,   v = ±V·B ṽ,   F = force_scale·B ũ
//! B = R(rotation) ∘ Refl^reflection
//! ```
//!
//! where `Refl` flips the ordinate and the velocity sign is negative only
//! for dualized maps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bvp::{AdjointSolution, CanonicalProblem, Solution};
use crate::error::{Error, Result};
use crate::trajectory::TrajectorySample;
use crate::vector::Vector2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralProblem {
    pub mass: f64,
    /// Bound on the force magnitude.
    pub u_max: f64,
    /// Initial and final position.
    pub x0: Vector2,
    pub v0: Vector2,
    pub v_f: Vector2,
    pub t0: f64,
}

impl GeneralProblem {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mass.is_finite()
            && self.mass > 0.0
            && self.u_max.is_finite()
            && self.u_max > 0.0
            && self.x0.is_finite()
            && self.v0.is_finite()
            && self.v_f.is_finite()
            && self.t0.is_finite();
        if !ok {
            return Err(Error::InvalidProblem(
                "mass and u_max must be positive and all fields finite".into(),
            ));
        }
        if self.v_f.norm() == 0.0 {
            return Err(Error::InvalidProblem("terminal velocity must be nonzero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    pub rotation: f64,
    pub reflection: bool,
    pub time_scale: f64,
    pub velocity_scale: f64,
    pub length_scale: f64,
    pub force_scale: f64,
    pub origin: Vector2,
    pub t0: f64,
    /// Time runs backwards and velocities change sign.
    pub dualized: bool,
}

impl NormalizationMap {
    pub fn identity() -> Self {
        Self {
            rotation: 0.0,
            reflection: false,
            time_scale: 1.0,
            velocity_scale: 1.0,
            length_scale: 1.0,
            force_scale: 1.0,
            origin: Vector2::ZERO,
            t0: 0.0,
            dualized: false,
        }
    }

    /// Canonical direction to physical direction.
    pub fn to_physical(&self, w: Vector2) -> Vector2 {
        let w = if self.reflection { w.reflected() } else { w };
        w.rotated(self.rotation)
    }

    /// Physical direction to canonical direction.
    pub fn to_canonical(&self, w: Vector2) -> Vector2 {
        let w = w.rotated(-self.rotation);
        if self.reflection {
            w.reflected()
        } else {
            w
        }
    }

    fn velocity_sign(&self) -> f64 {
        if self.dualized {
            -1.0
        } else {
            1.0
        }
    }

    /// Physical time of canonical time `tau` on a horizon of length `tau_f`.
    pub fn physical_time(&self, tau: f64, tau_f: f64) -> f64 {
        let tau = if self.dualized { tau_f - tau } else { tau };
        self.t0 + self.time_scale * tau
    }

    /// Canonical time of physical time `t`.
    pub fn canonical_time(&self, t: f64, tau_f: f64) -> f64 {
        let tau = (t - self.t0) / self.time_scale;
        if self.dualized {
            tau_f - tau
        } else {
            tau
        }
    }
}

/// Reduces `gp` to the canonical problem.
pub fn canonicalize(gp: &GeneralProblem) -> Result<(CanonicalProblem, NormalizationMap)> {
    gp.validate()?;
    let vf = gp.v_f.norm();
    let time_scale = gp.mass * vf / gp.u_max;
    let rotation = gp.v_f.y.atan2(gp.v_f.x) - PI;
    let w = gp.v0.rotated(-rotation) / vf;
    let reflection = w.y < 0.0;
    let speed = w.norm();
    let alpha = if speed == 0.0 { 0.0 } else { w.y.abs().atan2(w.x) };
    let map = NormalizationMap {
        rotation,
        reflection,
        time_scale,
        velocity_scale: vf,
        length_scale: vf * time_scale,
        force_scale: gp.u_max,
        origin: gp.x0,
        t0: gp.t0,
        dualized: false,
    };
    Ok((CanonicalProblem::new(speed, alpha)?, map))
}

/// Speed-inversion dual: `speed′ = 1/speed`, `α′ = α`, and
/// `t_f = speed·t_f′`. The returned map takes the dual trajectory onto the
/// primal one (time reversed, scaled by `speed`).
pub fn dualize(p: &CanonicalProblem) -> Result<(CanonicalProblem, NormalizationMap)> {
    if !(p.speed > 0.0) {
        return Err(Error::InvalidProblem("dual of a zero-speed problem is undefined".into()));
    }
    let s = p.speed;
    let dual = CanonicalProblem::new(1.0 / s, p.alpha)?;
    let map = NormalizationMap {
        rotation: p.alpha,
        reflection: true,
        time_scale: s,
        velocity_scale: s,
        length_scale: s * s,
        force_scale: 1.0,
        origin: Vector2::ZERO,
        t0: 0.0,
        dualized: true,
    };
    Ok((dual, map))
}

/// Adjoint parameters `(μ′, σ′)` of the dual problem predicted from a primal
/// solution. The dual starts with the primal terminal control, so
/// `η′ ∝ M(η − ζ)` and `ξ′ ∝ −speed·Mξ`, giving `μ′ = μ/|η − ζ|` and
/// `σ′ = (μ − σ)/|η − ζ|`.
pub fn dual_parameters(sol: &AdjointSolution) -> (f64, f64) {
    let r = (sol.eta - sol.zeta).norm();
    (sol.mu / r, (sol.mu - sol.sigma) / r)
}

/// A canonical solution viewed in the frame of a [`NormalizationMap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedTrajectory {
    pub solution: Solution,
    pub problem: CanonicalProblem,
    pub map: NormalizationMap,
}

pub fn map_back(solution: &Solution, problem: &CanonicalProblem, map: &NormalizationMap) -> MappedTrajectory {
    MappedTrajectory {
        solution: *solution,
        problem: *problem,
        map: *map,
    }
}

impl MappedTrajectory {
    /// Duration in physical units.
    pub fn t_f(&self) -> f64 {
        self.map.time_scale * self.solution.t_f()
    }

    pub fn t_start(&self) -> f64 {
        self.map.t0
    }

    pub fn t_end(&self) -> f64 {
        self.map.t0 + self.t_f()
    }

    fn tau(&self, t: f64) -> f64 {
        let tau_f = self.solution.t_f();
        self.map.canonical_time(t, tau_f).clamp(0.0, tau_f)
    }

    /// Physical `(x, v)` at physical time `t`.
    pub fn state_at(&self, t: f64) -> Result<(Vector2, Vector2)> {
        let (x, v) = self.solution.state_at(&self.problem, self.tau(t))?;
        let m = &self.map;
        Ok((
            m.origin + m.to_physical(x) * m.length_scale,
            m.to_physical(v) * (m.velocity_scale * m.velocity_sign()),
        ))
    }

    /// Physical force at physical time `t`.
    pub fn control_at(&self, t: f64) -> Vector2 {
        let u = self.solution.control_at(self.tau(t));
        self.map.to_physical(u) * self.map.force_scale
    }

    /// `n` samples uniform in physical time, ordered forward in time.
    pub fn samples(&self, n: usize) -> Result<Vec<TrajectorySample>> {
        let n = n.max(2);
        let (a, b) = (self.t_start(), self.t_end());
        (0..n)
            .map(|k| {
                let t = if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 };
                let (x, v) = self.state_at(t)?;
                Ok(TrajectorySample {
                    t,
                    x,
                    v,
                    u: self.control_at(t),
                    speed: v.norm(),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::{solve, SolverConfig};
    use crate::trajectory::{rk4_span, speed_regimes};
    use proptest::prelude::*;

    fn canonical_gp(v0: Vector2) -> GeneralProblem {
        GeneralProblem {
            mass: 1.0,
            u_max: 1.0,
            x0: Vector2::ZERO,
            v0,
            v_f: Vector2::new(-1.0, 0.0),
            t0: 0.0,
        }
    }

    #[test]
    fn canonical_input_is_identity() {
        let v0 = Vector2::from_angle(0.3 * PI) * 2.0;
        let (p, m) = canonicalize(&canonical_gp(v0)).unwrap();
        assert_eq!(m.rotation, 0.0);
        assert!(!m.reflection);
        assert_eq!((m.time_scale, m.velocity_scale, m.length_scale), (1.0, 1.0, 1.0));
        assert!((p.speed - 2.0).abs() < 1e-15 && (p.alpha - 0.3 * PI).abs() < 1e-15);

        let s = solve(&p, &SolverConfig::default()).unwrap();
        let mapped = map_back(&s, &p, &m);
        for smp in mapped.samples(40).unwrap() {
            let (x, v) = s.state_at(&p, smp.t).unwrap();
            assert_eq!((smp.x, smp.v), (x, v));
        }
    }

    #[test]
    fn reflection_below_axis() {
        let v0 = Vector2::from_angle(-0.3 * PI) * 2.0;
        let (p, m) = canonicalize(&canonical_gp(v0)).unwrap();
        assert!(m.reflection);
        assert!((p.alpha - 0.3 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_terminal_velocity() {
        let mut gp = canonical_gp(Vector2::new(1.0, 0.0));
        gp.v_f = Vector2::ZERO;
        assert!(canonicalize(&gp).is_err());
    }

    fn physical_rk4(gp: &GeneralProblem, mapped: &MappedTrajectory, steps: usize) -> (Vector2, Vector2) {
        let (x, v) = match mapped.solution {
            Solution::Collinear { solution, .. } if solution.switch_fraction > 0.0 && solution.switch_fraction < 1.0 => {
                let ts = mapped.map.physical_time(solution.switch_time(), solution.t_f);
                let a = mapped.control_at(mapped.t_start()) / gp.mass;
                let (x1, v1) = rk4_span(|_| a, gp.x0, gp.v0, mapped.t_start(), ts, steps / 2);
                rk4_span(|_| -a, x1, v1, ts, mapped.t_end(), steps / 2)
            }
            _ => rk4_span(
                |t| mapped.control_at(t) / gp.mass,
                gp.x0,
                gp.v0,
                mapped.t_start(),
                mapped.t_end(),
                steps,
            ),
        };
        (x, v)
    }

    #[test]
    fn mass_two_example() {
        let gp = GeneralProblem {
            mass: 2.0,
            u_max: 4.0,
            x0: Vector2::new(1.0, -3.0),
            v0: Vector2::new(0.0, 6.0),
            v_f: Vector2::new(0.0, -2.0),
            t0: 5.0,
        };
        let (p, m) = canonicalize(&gp).unwrap();
        assert!((p.speed - 3.0).abs() < 1e-15);
        assert!(p.alpha.abs() < 1e-15);
        assert!((m.time_scale - 1.0).abs() < 1e-15);
        let s = solve(&p, &SolverConfig::default()).unwrap();
        let mapped = map_back(&s, &p, &m);
        assert!((mapped.t_f() - m.time_scale * s.t_f()).abs() < 1e-15);

        let (x, v) = physical_rk4(&gp, &mapped, 10_000);
        assert!((x - gp.x0).norm() < 1e-6, "{x:?}");
        assert!((v - gp.v_f).norm() < 1e-6, "{v:?}");
        let (xe, ve) = mapped.state_at(mapped.t_end()).unwrap();
        assert!((xe - gp.x0).norm() < 1e-9 && (ve - gp.v_f).norm() < 1e-9);
    }

    #[test]
    fn general_planar_round_trip() {
        let gp = GeneralProblem {
            mass: 0.7,
            u_max: 2.5,
            x0: Vector2::new(-4.0, 2.0),
            v0: Vector2::new(1.5, -2.0),
            v_f: Vector2::new(0.8, 1.1),
            t0: -1.0,
        };
        let (p, m) = canonicalize(&gp).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        let mapped = map_back(&s, &p, &m);
        let (xa, va) = mapped.state_at(mapped.t_start()).unwrap();
        let (xb, vb) = mapped.state_at(mapped.t_end()).unwrap();
        let scale = gp.v0.norm().max(gp.v_f.norm());
        assert!((xa - gp.x0).norm() < 1e-9 * gp.x0.norm() && (va - gp.v0).norm() < 1e-9 * scale);
        assert!((xb - gp.x0).norm() < 1e-8 && (vb - gp.v_f).norm() < 1e-8);
        for t in [mapped.t_start(), mapped.t_end(), 0.3] {
            assert!((mapped.control_at(t).norm() - gp.u_max).abs() < 1e-12);
        }
        let (x, v) = physical_rk4(&gp, &mapped, 10_000);
        assert!((x - gp.x0).norm() < 1e-6 && (v - gp.v_f).norm() < 1e-6);
    }

    #[test]
    fn unit_speed_dual_is_identical() {
        let p = CanonicalProblem::new(1.0, 0.4 * PI).unwrap();
        let (d, _) = dualize(&p).unwrap();
        assert_eq!(d, p);
        assert!(dualize(&CanonicalProblem::new(0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn dual_pairs_correspond() {
        let cfg = SolverConfig::default();
        for (speed, alpha) in [(3.0, 0.25 * PI), (2.0, 0.6 * PI)] {
            let p = CanonicalProblem::new(speed, alpha).unwrap();
            let (d, map) = dualize(&p).unwrap();
            let sp = solve(&p, &cfg).unwrap();
            let sd = solve(&d, &cfg).unwrap();
            assert!((sp.t_f() - speed * sd.t_f()).abs() < 1e-8);
            let (a, b) = (sp.planar().unwrap(), sd.planar().unwrap());
            let (mu, sigma) = dual_parameters(a);
            assert!((mu - b.mu).abs() < 1e-8 && (sigma - b.sigma).abs() < 1e-8);

            // the dual trajectory mapped back is the primal one
            let mapped = map_back(&sd, &d, &map);
            assert!((mapped.t_f() - sp.t_f()).abs() < 1e-8);
            for k in 0..=20 {
                let t = sp.t_f() * k as f64 / 20.0;
                let (x, v) = sp.state_at(&p, t).unwrap();
                let (xm, vm) = mapped.state_at(t).unwrap();
                assert!((x - xm).norm() < 1e-7 && (v - vm).norm() < 1e-7, "{t}");
            }

            // time reversal flips v but not u, so the regime flips too
            let rp = speed_regimes(&sp, &p, 64).unwrap();
            let rd = speed_regimes(&sd, &d, 64).unwrap();
            assert!(rd.initial().is_some());
            assert_ne!(rd.initial(), rp.terminal());
            assert_ne!(rd.terminal(), rp.initial());
        }
    }

    proptest! {
        #[test]
        fn dual_involution(speed in 1e-3f64..1e3, alpha in 0.0f64..PI) {
            let p = CanonicalProblem::new(speed, alpha).unwrap();
            let (d, _) = dualize(&p).unwrap();
            let (dd, _) = dualize(&d).unwrap();
            prop_assert_eq!(dd.alpha, p.alpha);
            prop_assert!((dd.speed - p.speed).abs() <= f64::EPSILON * p.speed);
        }

        #[test]
        fn canonical_frame_invariants(
            vx in -5.0f64..5.0, vy in -5.0f64..5.0,
            fx in -3.0f64..3.0, fy in -3.0f64..3.0,
            mass in 0.1f64..10.0, u_max in 0.1f64..10.0,
        ) {
            prop_assume!(fx.hypot(fy) > 1e-3);
            let gp = GeneralProblem {
                mass, u_max, x0: Vector2::new(1.0, 2.0),
                v0: Vector2::new(vx, vy), v_f: Vector2::new(fx, fy), t0: 0.0,
            };
            let (p, m) = canonicalize(&gp).unwrap();
            prop_assert!((m.length_scale - m.velocity_scale * m.time_scale).abs() <= 1e-15 * m.length_scale);
            prop_assert!((0.0..=PI).contains(&p.alpha));
            let vf = m.to_canonical(gp.v_f) / m.velocity_scale;
            prop_assert!((vf - Vector2::new(-1.0, 0.0)).norm() < 1e-12);
            let v0 = m.to_physical(p.v0()) * m.velocity_scale;
            prop_assert!((v0 - gp.v0).norm() < 1e-12 * (1.0 + gp.v0.norm()));
        }
    }
}
