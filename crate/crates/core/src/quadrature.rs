//! Adaptive Gauss–Kronrod (7/15) quadrature for small vector-valued integrands.
//!
//! Used by the oracles and by tests as an integration route that is
//! independent of the closed-form kernels.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Returns the Kronrod estimate, the Gauss–Kronrod error estimate and the
/// roundoff floor (a multiple of ε times the integral of |f|).
fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> ([f64; N], f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut resabs = 0.0_f64;
    for k in 0..N {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
        resabs += WGK[7] * fc[k].abs();
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            resabs += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0_f64;
    for k in 0..N {
        kron[k] *= h;
        gauss[k] *= h;
        err = err.max((kron[k] - gauss[k]).abs());
    }
    (kron, err, 50.0 * f64::EPSILON * resabs * h)
}

/// Integrates `f` over `[a, b]` to an absolute tolerance `tol` (per component).
///
/// `breakpoints` are interior points where the integrand is known to vary
/// sharply; they seed the initial partition.
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> [f64; N] {
    let mut total = [0.0; N];
    if b <= a {
        return total;
    }
    let mut edges: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    edges.extend(inner);
    edges.push(b);

    let span = b - a;
    let mut stack: Vec<(f64, f64, u32)> = edges.windows(2).map(|w| (w[0], w[1], 0)).collect();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err, floor) = gk15(&f, lo, hi);
        let local_tol = (tol * (hi - lo) / span).max(floor);
        if err <= local_tol || depth >= 50 || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            for k in 0..N {
                total[k] += val[k];
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let [v] = integrate(|x| [x.powi(5) - 3.0 * x * x], 0.0, 2.0, &[], 1e-14);
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        // ∫_{-1}^{1} eps / (x² + eps²) dx = 2 atan(1/eps)
        let eps = 1e-4;
        let [v] = integrate(|x| [eps / (x * x + eps * eps)], -1.0, 1.0, &[0.0], 1e-12);
        assert!((v - 2.0 * (1.0 / eps).atan()).abs() < 1e-10);
    }

    #[test]
    fn vector_components_integrated_together() {
        let [s, c] = integrate(|x| [x.sin(), x.cos()], 0.0, std::f64::consts::PI, &[], 1e-13);
        assert!((s - 2.0).abs() < 1e-12);
        assert!(c.abs() < 1e-12);
    }
}
