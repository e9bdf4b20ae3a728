//! Closed-form scalar kernels of the steering law `u = (η − ξt)/|η − ξt|`.
//!
//! With `ρ = |ξ|`, `ρσ = (ξ, η)` and `|η| = 1`, integrating the control once
//! and twice gives
//!
//! ```text
//! v(t) = v0 + V_ξ(t) ξ + V_η(t) η
//! x(t) = x0 + v0 t + X_ξ(t) ξ + X_η(t) η
//! ```
//!
//! where the four scalar kernels depend only on `(ρ, σ, t)`. They are built
//! from `R(t) = (ρ²t² − 2σρt + 1)^{1/2}` and `V(t) = ln(ρt − σ + R(t))`,
//! the antiderivative of `ρ/R`.
//!
//! Two numerical hazards are handled here rather than by callers:
//!
//! * `σ → 1`. Optimal solutions sit extremely close to `σ = 1` (the gap
//!   `1 − σ` routinely reaches 1e-9), so [`KernelParams`] carries the gap
//!   explicitly and every formula is rearranged to use it. `V` enters the
//!   kernels only through `V(t) − V(0)`, which is evaluated without
//!   cancellation.
//! * `ρt → 0`. The closed forms divide by `ρ³`. Below [`SERIES_THRESHOLD`]
//!   the kernels switch to the Legendre expansion
//!   `1/R = Σ Pₙ(σ) (ρt)ⁿ`, integrated term by term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `ρt` (or `μ`) the series path is used.
pub const SERIES_THRESHOLD: f64 = 0.1;

/// Smallest admissible `1 − σ` wherever the logarithm is evaluated.
pub const MIN_SIGMA_GAP: f64 = 1e-12;

const SERIES_TERMS: usize = 40;

/// Parameters `(ρ, σ)` of the kernels, with `1 − σ` stored to full precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub rho: f64,
    pub sigma: f64,
    gap: f64,
}

impl KernelParams {
    pub fn new(rho: f64, sigma: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0 && sigma.is_finite() && sigma.abs() <= 1.0) {
            return Err(Error::InvalidParams { rho, sigma });
        }
        Ok(Self {
            rho,
            sigma,
            gap: 1.0 - sigma,
        })
    }

    /// Builds the parameters from `1 − σ` directly, so that `σ` extremely
    /// close to 1 keeps its relative precision.
    pub fn with_gap(rho: f64, one_minus_sigma: f64) -> Result<Self> {
        let sigma = 1.0 - one_minus_sigma;
        if !(rho.is_finite() && rho >= 0.0 && (0.0..=2.0).contains(&one_minus_sigma)) {
            return Err(Error::InvalidParams { rho, sigma });
        }
        Ok(Self {
            rho,
            sigma,
            gap: one_minus_sigma,
        })
    }

    pub fn one_minus_sigma(&self) -> f64 {
        self.gap
    }

    /// `1 − σ²`, computed from the stored gap.
    fn one_minus_sigma_sq(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }

    fn check_log(&self) -> Result<()> {
        if self.gap < MIN_SIGMA_GAP {
            Err(Error::SigmaSingular { sigma: self.sigma })
        } else {
            Ok(())
        }
    }

    /// `ρt − σ`, rearranged around 1 to keep the gap's precision.
    fn shifted(&self, t: f64) -> f64 {
        (self.rho * t - 1.0) + self.gap
    }
}

/// The four kernels evaluated at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub v_xi: f64,
    pub v_eta: f64,
    pub x_xi: f64,
    pub x_eta: f64,
}

/// Coefficients of the reduced linear system for `ζ = ξ t_f` and `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub a: f64,
    pub b: f64,
    pub a_zeta: f64,
    pub a_eta: f64,
    pub b_zeta: f64,
    pub b_eta: f64,
}

/// Scalar products of the reduced system. `f12` is a bilinear form and may
/// be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormValues {
    pub fx2: f64,
    pub f02: f64,
    pub f12: f64,
}

/// `R(t) = |η − ξt|`.
pub fn radical_r(params: &KernelParams, t: f64) -> Result<f64> {
    let s = params.shifted(t);
    let radicand = s * s + params.one_minus_sigma_sq();
    if radicand < -1e-12 {
        return Err(Error::NegativeRadicand { radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `V(t) = ln(ρt − σ + R(t))`.
pub fn log_v(params: &KernelParams, t: f64) -> Result<f64> {
    params.check_log()?;
    let s = params.shifted(t);
    let r = radical_r(params, t)?;
    if s >= 0.0 {
        Ok((s + r).ln())
    } else {
        // s + R = (1 − σ²)/(R − s) avoids cancellation for s < 0
        Ok(params.gap.ln() + ((2.0 - params.gap) / (r - s)).ln())
    }
}

/// `V(t) − V(0) = ln((ρt − σ + R(t)) / (1 − σ))`.
fn log_ratio(params: &KernelParams, t: f64, r: f64) -> Result<f64> {
    params.check_log()?;
    let s = params.shifted(t);
    if s >= 0.0 {
        Ok((s + r).ln() - params.gap.ln())
    } else {
        Ok(((2.0 - params.gap) / (r - s)).ln())
    }
}

/// Legendre polynomials `P₀(σ) … P_{n−1}(σ)`.
fn legendre(sigma: f64, out: &mut [f64; SERIES_TERMS]) {
    out[0] = 1.0;
    out[1] = sigma;
    for n in 1..SERIES_TERMS - 1 {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * sigma * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Sums `Σ Pₙ xⁿ w(n)` for each of the supplied weight functions.
fn legendre_sums<const K: usize>(sigma: f64, x: f64, weight: impl Fn(f64) -> [f64; K]) -> [f64; K] {
    let mut p = [0.0; SERIES_TERMS];
    legendre(sigma, &mut p);
    let mut acc = [0.0; K];
    let mut xn = 1.0;
    for (n, pn) in p.iter().enumerate() {
        let w = weight(n as f64);
        for k in 0..K {
            acc[k] += pn * xn * w[k];
        }
        xn *= x;
        if xn.abs() < 1e-20 {
            break;
        }
    }
    acc
}

pub(crate) fn kernels_series(params: &KernelParams, t: f64) -> KernelValues {
    let x = params.rho * t;
    let [ve, vx, xe, xx] = legendre_sums(params.sigma, x, |n| {
        [
            1.0 / (n + 1.0),
            1.0 / (n + 2.0),
            1.0 / ((n + 1.0) * (n + 2.0)),
            1.0 / ((n + 2.0) * (n + 3.0)),
        ]
    });
    KernelValues {
        v_xi: -t * t * vx,
        v_eta: t * ve,
        x_xi: -t * t * t * xx,
        x_eta: t * t * xe,
    }
}

pub(crate) fn kernels_closed(params: &KernelParams, t: f64) -> Result<KernelValues> {
    let rho = params.rho;
    let sigma = params.sigma;
    let r = radical_r(params, t)?;
    let l = log_ratio(params, t, r)?;
    // R(t) − 1 without cancellation
    let r_minus_1 = (rho * t * (rho * t - 2.0 * sigma)) / (r + 1.0);
    let rho2 = rho * rho;
    let rho3 = rho2 * rho;
    let v_xi = -(sigma * l + r_minus_1) / rho2;
    let v_eta = l / rho;
    let x_xi = ((-rho * t + 3.0 * sigma) * r - 3.0 * sigma
        + (-2.0 * rho * sigma * t + 3.0 * sigma * sigma - 1.0) * l)
        / (2.0 * rho3)
        + t / rho2;
    let x_eta = (-r_minus_1 + (rho * t - sigma) * l) / rho2;
    Ok(KernelValues {
        v_xi,
        v_eta,
        x_xi,
        x_eta,
    })
}

/// All four kernels at time `t`.
pub fn kernels(params: &KernelParams, t: f64) -> Result<KernelValues> {
    if t <= 0.0 {
        return Ok(KernelValues {
            v_xi: 0.0,
            v_eta: 0.0,
            x_xi: 0.0,
            x_eta: 0.0,
        });
    }
    if params.rho * t < SERIES_THRESHOLD {
        Ok(kernels_series(params, t))
    } else {
        kernels_closed(params, t)
    }
}

/// `(V_ξ(t), V_η(t))`.
pub fn velocity_kernels(params: &KernelParams, t: f64) -> Result<(f64, f64)> {
    let k = kernels(params, t)?;
    Ok((k.v_xi, k.v_eta))
}

/// `(X_ξ(t), X_η(t))`.
pub fn position_kernels(params: &KernelParams, t: f64) -> Result<(f64, f64)> {
    let k = kernels(params, t)?;
    Ok((k.x_xi, k.x_eta))
}

/// Reduced-system coefficients as functions of `μ = ρ t_f` and `σ`.
pub fn coefficients(mu: f64, sigma: f64) -> Result<CoefficientSet> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidParams { rho: mu, sigma });
    }
    coefficients_at(&KernelParams::new(mu, sigma)?)
}

/// As [`coefficients`], with `params.rho` read as `μ`.
pub fn coefficients_at(params: &KernelParams) -> Result<CoefficientSet> {
    let mu = params.rho;
    let sigma = params.sigma;
    params.check_log()?;
    let r = radical_r(params, 1.0)?;
    let a = mu * (mu - 2.0 * sigma) / (r + 1.0);
    let b = if mu == 0.0 { 0.0 } else { log_ratio(params, 1.0, r)? };

    let [a_zeta, a_eta, b_eta] = if mu < SERIES_THRESHOLD {
        series_coefficients(mu, sigma)
    } else {
        closed_coefficients(mu, sigma, a, b)
    };
    Ok(CoefficientSet {
        a,
        b,
        a_zeta,
        a_eta,
        b_zeta: a_eta,
        b_eta,
    })
}

/// `[a_ζ, a_η, b_η]` from the Legendre series in `μ`.
fn series_coefficients(mu: f64, sigma: f64) -> [f64; 3] {
    let [az, ae, be] = legendre_sums(sigma, mu, |n| [1.0 / (n + 3.0), 1.0 / (n + 2.0), 1.0 / (n + 1.0)]);
    [-az, ae, -be]
}

/// `[a_ζ, a_η, b_η]` from the closed forms in `a` and `b`.
fn closed_coefficients(mu: f64, sigma: f64, a: f64, b: f64) -> [f64; 3] {
    let mu2 = mu * mu;
    let a_zeta = -((mu + 3.0 * sigma) * a + mu + (3.0 * sigma * sigma - 1.0) * b) / (2.0 * mu2 * mu);
    let a_eta = (a + sigma * b) / mu2;
    [a_zeta, a_eta, -b / mu]
}

/// Both evaluation paths of `[a_ζ, a_η, b_η]` at `μ > 0`, series first.
pub(crate) fn coefficient_paths(params: &KernelParams) -> Result<([f64; 3], [f64; 3])> {
    let (mu, sigma) = (params.rho, params.sigma);
    params.check_log()?;
    let r = radical_r(params, 1.0)?;
    let a = mu * (mu - 2.0 * sigma) / (r + 1.0);
    let b = log_ratio(params, 1.0, r)?;
    Ok((series_coefficients(mu, sigma), closed_coefficients(mu, sigma, a, b)))
}

/// Scalar forms of the reduced system.
///
/// With `v_f = t_f (a_ζ ζ + a_η η)` and `v0 = t_f ((a_ζ+b_ζ) ζ + (a_η+b_η) η)`:
/// `fx2 = |v_f|²/t_f²`, `f02 = |v0|²/t_f²` and `f12 = (v0, v_f)/t_f²`.
pub fn scalar_forms(mu: f64, sigma: f64) -> Result<FormValues> {
    scalar_forms_at(&KernelParams::new(mu, sigma)?)
}

/// As [`scalar_forms`], with `params.rho` read as `μ`.
pub fn scalar_forms_at(params: &KernelParams) -> Result<FormValues> {
    let c = coefficients_at(params)?;
    Ok(forms_from_coefficients(&c, params.rho, params.sigma))
}

pub(crate) fn forms_from_coefficients(c: &CoefficientSet, mu: f64, sigma: f64) -> FormValues {
    let (az, ae) = (c.a_zeta, c.a_eta);
    let sz = c.a_zeta + c.b_zeta;
    let se = c.a_eta + c.b_eta;
    let mu2 = mu * mu;
    FormValues {
        fx2: az * az * mu2 + 2.0 * az * ae * mu * sigma + ae * ae,
        f02: sz * sz * mu2 + 2.0 * mu * sigma * sz * se + se * se,
        f12: sz * az * mu2 + mu * sigma * (sz * ae + se * az) + se * ae,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::vector::Vector2;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn p(rho: f64, sigma: f64) -> KernelParams {
        KernelParams::new(rho, sigma).unwrap()
    }

    /// Independent route: integrate the control-law integrands directly.
    fn quad_kernels(rho: f64, sigma: f64, t: f64) -> [f64; 4] {
        let r = |u: f64| (rho * rho * u * u - 2.0 * sigma * rho * u + 1.0).sqrt();
        let brk = if rho > 0.0 { vec![sigma / rho] } else { vec![] };
        integrate(
            |u| {
                let ri = 1.0 / r(u);
                [-u * ri, ri, (t - u) * (-u) * ri, (t - u) * ri]
            },
            0.0,
            t,
            &brk,
            1e-13,
        )
    }

    #[test]
    fn radical_examples() {
        assert_eq!(radical_r(&p(0.0, 0.3), 5.0).unwrap(), 1.0);
        assert!((radical_r(&p(1.0, 0.0), 1.0).unwrap() - SQRT2).abs() < 1e-15);
        assert!((radical_r(&p(1.0, 0.5), 1.0).unwrap() - 1.0).abs() < 1e-15);
        for t in [0.0, 0.3, 2.0] {
            // R = |η − ξt| for concrete vectors with |η| = 1, (ξ, η) = ρσ
            let eta = Vector2::new(1.0, 0.0);
            let xi = Vector2::new(0.5, 0.5 * 3f64.sqrt());
            let q = (eta - xi * t).norm();
            assert!((radical_r(&p(1.0, 0.5), t).unwrap() - q).abs() < 1e-15);
        }
        assert_eq!(radical_r(&p(2.0, -0.3), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn log_v_examples() {
        assert_eq!(log_v(&p(1.0, 0.0), 0.0).unwrap(), 0.0);
        let [ve] = integrate(|u| [1.0 / (u * u + 1.0).sqrt()], 0.0, 1.0, &[], 1e-14);
        assert!((log_v(&p(1.0, 0.0), 1.0).unwrap() - ve).abs() < 1e-14);
        assert!((log_v(&p(1.0, 0.0), 1.0).unwrap() - 0.881_373_587_019_543).abs() < 1e-14);
        assert!((log_v(&p(2.0, -0.5), 0.0).unwrap() - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_v_rejects_sigma_one() {
        assert!(matches!(log_v(&p(1.0, 1.0), 0.5), Err(Error::SigmaSingular { .. })));
        let near = KernelParams::with_gap(1.0, 1e-13).unwrap();
        assert!(log_v(&near, 0.5).is_err());
        let fine = KernelParams::with_gap(1.0, 1e-10).unwrap();
        assert!(log_v(&fine, 0.5).unwrap().is_finite());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(KernelParams::new(-1.0, 0.0).is_err());
        assert!(KernelParams::new(1.0, 1.5).is_err());
        assert!(KernelParams::new(f64::NAN, 0.0).is_err());
        assert!(KernelParams::with_gap(1.0, 2.5).is_err());
    }

    #[test]
    fn kernels_vanish_at_zero() {
        for (rho, sigma) in [(0.0, 0.0), (1.0, 0.5), (3.0, -0.9), (1e-9, 0.2)] {
            let k = kernels(&p(rho, sigma), 0.0).unwrap();
            assert_eq!((k.v_xi, k.v_eta, k.x_xi, k.x_eta), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn velocity_kernel_examples() {
        let (vx, ve) = velocity_kernels(&p(1.0, 0.0), 1.0).unwrap();
        assert!((vx + (SQRT2 - 1.0)).abs() < 1e-14);
        assert!((ve - (1.0 + SQRT2).ln()).abs() < 1e-14);
        let (vx, ve) = velocity_kernels(&p(1e-9, 0.0), 2.0).unwrap();
        assert!((vx + 2.0).abs() < 1e-8);
        assert!((ve - 2.0).abs() < 1e-8);
    }

    #[test]
    fn position_kernel_examples() {
        // frozen from 30-digit quadrature of the integrands
        let (xx, xe) = position_kernels(&p(1.0, 0.0), 1.0).unwrap();
        assert!((xx + 0.147_793_574_696_319_04).abs() < 1e-10);
        assert!((xe - 0.467_160_024_646_447_98).abs() < 1e-10);
        let k = kernels(&p(2.0, -0.5), 1.5).unwrap();
        assert!((k.v_xi + 0.456_961_413_838_270_14).abs() < 1e-12);
        assert!((k.v_eta - 0.777_705_620_110_908_73).abs() < 1e-12);
        assert!((k.x_xi + 0.277_974_989_311_122_11).abs() < 1e-12);
        assert!((k.x_eta - 0.709_597_016_328_092_95).abs() < 1e-12);
        let (xx, xe) = position_kernels(&p(1e-9, 0.0), 2.0).unwrap();
        assert!((xx + 4.0 / 3.0).abs() < 1e-7);
        assert!((xe - 2.0).abs() < 1e-7);
    }

    const RHOS: [f64; 4] = [0.1, 0.5, 1.0, 3.0];
    const SIGMAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];
    const TS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

    #[test]
    fn derivative_identities() {
        let h = 1e-6;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1.0);
        for rho in RHOS {
            for sigma in SIGMAS {
                let kp = p(rho, sigma);
                for t in TS {
                    let r = radical_r(&kp, t).unwrap();
                    let dv = (log_v(&kp, t + h).unwrap() - log_v(&kp, t - h).unwrap()) / (2.0 * h);
                    assert!(close(dv * r, rho), "dV/dt at {rho} {sigma} {t}");
                    let kp_ = kernels(&kp, t + h).unwrap();
                    let km = kernels(&kp, t - h).unwrap();
                    let k0 = kernels(&kp, t).unwrap();
                    assert!(close((kp_.v_xi - km.v_xi) / (2.0 * h), -t / r));
                    assert!(close((kp_.v_eta - km.v_eta) / (2.0 * h), 1.0 / r));
                    assert!(close((kp_.x_xi - km.x_xi) / (2.0 * h), k0.v_xi));
                    assert!(close((kp_.x_eta - km.x_eta) / (2.0 * h), k0.v_eta));
                }
            }
        }
    }

    #[test]
    fn quadrature_equivalence() {
        for rho in RHOS {
            for sigma in SIGMAS {
                for t in TS {
                    let k = kernels(&p(rho, sigma), t).unwrap();
                    let q = quad_kernels(rho, sigma, t);
                    let got = [k.v_xi, k.v_eta, k.x_xi, k.x_eta];
                    for i in 0..4 {
                        assert!((got[i] - q[i]).abs() < 1e-9, "{rho} {sigma} {t} #{i}: {} vs {}", got[i], q[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn near_unit_sigma_kernels_match_quadrature() {
        for gap in [1e-3, 1e-6, 1e-9] {
            let kp = KernelParams::with_gap(2.0, gap).unwrap();
            let sigma = 1.0 - gap;
            // integrate with exact 1 − σ² to match the stored gap
            let r = |u: f64| {
                let s = 2.0 * u - 1.0 + gap;
                (s * s + gap * (2.0 - gap)).sqrt()
            };
            let t = 1.3;
            let q = integrate(
                |u| {
                    let ri = 1.0 / r(u);
                    [-u * ri, ri, (t - u) * (-u) * ri, (t - u) * ri]
                },
                0.0,
                t,
                &[sigma / 2.0],
                1e-13,
            );
            let k = kernels(&kp, t).unwrap();
            let got = [k.v_xi, k.v_eta, k.x_xi, k.x_eta];
            for i in 0..4 {
                assert!((got[i] - q[i]).abs() < 1e-9 * q[i].abs().max(1.0), "gap {gap} #{i}");
            }
        }
    }

    #[test]
    fn series_closed_form_crossover() {
        for sigma in SIGMAS {
            let t = 1.0;
            let rho = SERIES_THRESHOLD;
            let kp = p(rho, sigma);
            let s = kernels_series(&kp, t);
            let c = kernels_closed(&kp, t).unwrap();
            assert!((s.v_xi - c.v_xi).abs() < 1e-9);
            assert!((s.v_eta - c.v_eta).abs() < 1e-9);
            assert!((s.x_xi - c.x_xi).abs() < 1e-9);
            assert!((s.x_eta - c.x_eta).abs() < 1e-9);
        }
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients(0.0, 0.3).unwrap();
        assert_eq!((c.a, c.b), (0.0, 0.0));
        assert!((c.a_zeta + 1.0 / 3.0).abs() < 1e-15);
        assert!((c.a_eta - 0.5).abs() < 1e-15);
        assert!((c.b_eta + 1.0).abs() < 1e-15);

        let c = coefficients(1.0, 0.0).unwrap();
        assert!((c.a - (SQRT2 - 1.0)).abs() < 1e-15);
        assert!((c.b - (1.0 + SQRT2).ln()).abs() < 1e-15);
        assert!((c.a_zeta + 0.266_419_987_676_776_01).abs() < 1e-13);
        assert!((c.a_eta - 0.414_213_562_373_095_05).abs() < 1e-13);
        assert_eq!(c.a_eta, c.b_zeta);
        assert!((c.b_eta + 0.881_373_587_019_543_03).abs() < 1e-13);

        let c = coefficients(2.5, 0.7).unwrap();
        assert!((c.a_zeta + 0.255_784_257_880_422_42).abs() < 1e-12);
        assert!((c.a_eta - 0.432_316_098_757_120_78).abs() < 1e-12);
        assert!((c.b_eta + 1.008_847_968_073_312_26).abs() < 1e-12);

        let c = coefficients(0.05, 0.3).unwrap();
        assert!((c.a_zeta + 0.336_892_943_403_682_07).abs() < 1e-13);
        assert!((c.a_eta - 0.504_762_404_127_527_25).abs() < 1e-13);
        assert!((c.b_eta + 1.007_183_989_634_521_31).abs() < 1e-13);
    }

    #[test]
    fn coefficient_small_mu_limits() {
        for mu in [1e-4, 1e-5, 1e-6] {
            let c = coefficients(mu, 0.0).unwrap();
            assert!((c.a_zeta + 1.0 / 3.0).abs() < 2.0 * mu);
            assert!((c.a_eta - 0.5).abs() < 2.0 * mu);
            assert!((c.b_eta + 1.0).abs() < 2.0 * mu);
        }
    }

    #[test]
    fn coefficients_match_kernels_at_unit_time() {
        // a_ζ = V_ξ(1) − X_ξ(1), a_η = V_η(1) − X_η(1), b_ζ = −V_ξ(1), b_η = −V_η(1)
        for mu in [0.05, 0.3, 1.0, 4.0, 12.0] {
            for sigma in [-0.99, -0.4, 0.0, 0.6, 0.999] {
                let c = coefficients(mu, sigma).unwrap();
                let q = quad_kernels(mu, sigma, 1.0);
                assert!((c.a_zeta - (q[0] - q[2])).abs() < 1e-9, "{mu} {sigma}");
                assert!((c.a_eta - (q[1] - q[3])).abs() < 1e-9);
                assert!((c.b_zeta + q[0]).abs() < 1e-9);
                assert!((c.b_eta + q[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coefficient_crossover_continuity() {
        for sigma in SIGMAS {
            let kp = p(SERIES_THRESHOLD, sigma);
            let series = coefficients_at(&kp).unwrap();
            let mu = SERIES_THRESHOLD;
            let r = radical_r(&kp, 1.0).unwrap();
            let a = r - 1.0;
            let b = log_ratio(&kp, 1.0, r).unwrap();
            let az = -((mu + 3.0 * sigma) * a + mu + (3.0 * sigma * sigma - 1.0) * b) / (2.0 * mu.powi(3));
            let ae = (a + sigma * b) / (mu * mu);
            assert!((series.a_zeta - az).abs() < 1e-9);
            assert!((series.a_eta - ae).abs() < 1e-9);
            assert!((series.b_eta + b / mu).abs() < 1e-9);
        }
    }

    #[test]
    fn form_examples() {
        let f = scalar_forms(1e-9, 0.0).unwrap();
        assert!((f.fx2 - 0.25).abs() < 1e-8);
        assert!((1.0 / f.fx2.sqrt() - 2.0).abs() < 1e-7);
        let f = scalar_forms(1.0, 0.0).unwrap();
        let expected = 0.266_419_987_676_776_01f64.powi(2) + 0.414_213_562_373_095_05f64.powi(2);
        assert!((f.fx2 - expected).abs() < 1e-13);
    }

    #[test]
    fn forms_are_gram_products() {
        // realize ζ, η as vectors and compare with the vector combinations
        for (mu, sigma) in [(0.5, 0.2), (2.0, 0.95), (1.3, -0.7), (6.0, 0.9999)] {
            let c = coefficients(mu, sigma).unwrap();
            let eta = Vector2::new(1.0, 0.0);
            let zeta = Vector2::new(sigma, (1.0 - sigma * sigma).sqrt()) * mu;
            let vf = zeta * c.a_zeta + eta * c.a_eta;
            let v0 = zeta * (c.a_zeta + c.b_zeta) + eta * (c.a_eta + c.b_eta);
            let f = scalar_forms(mu, sigma).unwrap();
            assert!((f.fx2 - vf.norm_squared()).abs() < 1e-12);
            assert!((f.f02 - v0.norm_squared()).abs() < 1e-12);
            assert!((f.f12 - v0.dot(vf)).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_control_along_trajectory() {
        let xi = Vector2::new(0.7, -1.9);
        let eta = Vector2::from_angle(2.1);
        let kp = p(xi.norm(), xi.dot(eta) / xi.norm());
        for i in 0..200 {
            let t = i as f64 * 0.05;
            let q = eta - xi * t;
            let u = q / radical_r(&kp, t).unwrap();
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn a_eta_equals_b_zeta(mu in 0.0f64..40.0, sigma in -1.0f64..0.999_999) {
            let c = coefficients(mu, sigma).unwrap();
            prop_assert_eq!(c.a_eta, c.b_zeta);
            prop_assert!(c.a_zeta.is_finite() && c.a_eta.is_finite() && c.b_eta.is_finite());
        }

        #[test]
        fn forms_nonnegative(mu in 0.0f64..40.0, sigma in -1.0f64..0.999_999) {
            let f = scalar_forms(mu, sigma).unwrap();
            prop_assert!(f.fx2 > 0.0);
            prop_assert!(f.f02 >= 0.0);
        }

        #[test]
        fn b_nonnegative_for_nonpositive_sigma(mu in 0.0f64..40.0, sigma in -1.0f64..=0.0) {
            prop_assert!(coefficients(mu, sigma).unwrap().b >= 0.0);
        }
    }
}
