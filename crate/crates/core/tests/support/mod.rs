//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls into the crate: integrals are evaluated by adaptive
//! Gauss-Kronrod quadrature and Bessel functions by the trapezoid rule on
//! their integral representation.

#![allow(dead_code)]

use std::f64::consts::PI;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7)
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * KRONROD_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integral of `f` over `[a, b]`:
/// the interval with the largest error estimate is bisected until the total
/// estimate drops below `max(abs_tol, 1e-14 * |integral|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    const REL_TOL: f64 = 1e-14;
    const MAX_INTERVALS: usize = 2000;
    if a == b {
        return 0.0;
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(REL_TOL * total.abs()) || parts.len() >= MAX_INTERVALS {
            return total;
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// `e^{-z} I_n(z)` from `(1/pi) * int_0^pi e^{z(cos t - 1)} cos(n t) dt`.
///
/// The integrand is smooth and periodic, so the trapezoid rule converges
/// geometrically; the point count grows with `sqrt(z)` to resolve the peak at 0.
pub fn scaled_bessel_i(n: u32, z: f64) -> f64 {
    assert!(z >= 0.0);
    let points = 64 + (12.0 * z.sqrt()) as usize + 4 * n as usize;
    let h = PI / points as f64;
    let g = |t: f64| (z * (t.cos() - 1.0)).exp() * (n as f64 * t).cos();
    let mut sum = 0.5 * (g(0.0) + g(PI));
    for k in 1..points {
        sum += g(k as f64 * h);
    }
    sum * h / PI
}

pub fn ln_bessel_i(n: u32, z: f64) -> f64 {
    scaled_bessel_i(n, z).ln() + z
}

/// `Q_M(a, b)` from its defining integral
/// `int_b^inf x (x/a)^{M-1} exp(-(x^2+a^2)/2) I_{M-1}(a x) dx`.
pub fn marcum_q(m: u32, a: f64, b: f64) -> f64 {
    assert!(m >= 1 && a >= 0.0 && b >= 0.0);
    let nu = m - 1;
    let integrand = |x: f64| -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if a == 0.0 {
            // limit of (x/a)^nu I_nu(a x) as a -> 0 is x^{2 nu} / (2^nu nu!)
            let fact: f64 = (1..=nu).map(f64::from).product();
            return x.powi(2 * nu as i32 + 1) / (2f64.powi(nu as i32) * fact)
                * (-0.5 * x * x).exp();
        }
        let core = (-0.5 * (x - a) * (x - a)).exp() * scaled_bessel_i(nu, a * x);
        x * (x / a).powi(nu as i32) * core
    };
    let top = a.max(b) + 14.0 + 2.0 * m as f64;
    let mut edges = vec![b];
    if a > b {
        edges.push(a);
    }
    edges.push(top);
    edges
        .windows(2)
        .map(|w| integrate(integrand, w[0], w[1], 1e-13))
        .sum()
}

/// `Gamma(s, x) / Gamma(s)` as a ratio of two integrals of `t^{s-1} e^{-t}`.
/// For `s < 1` the substitution `t = u^{1/s}` removes the singularity at 0.
pub fn upper_regularized_gamma(s: f64, x: f64) -> f64 {
    let (lower, upper) = if s < 1.0 {
        let g = |u: f64| (-u.powf(1.0 / s)).exp();
        let end = (60.0f64).powf(s);
        (
            integrate(g, 0.0, x.powf(s), 0.0),
            integrate(g, x.powf(s), end, 0.0),
        )
    } else {
        let g = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                ((s - 1.0) * t.ln() - t).exp()
            }
        };
        let end = x.max(s) + 60.0 + 10.0 * s.sqrt();
        let mode = s - 1.0;
        if x < mode {
            let l = integrate(g, 0.0, x, 0.0);
            (l, integrate(g, x, mode, 0.0) + integrate(g, mode, end, 0.0))
        } else {
            let l = integrate(g, 0.0, mode, 0.0) + integrate(g, mode, x, 0.0);
            (l, integrate(g, x, end, 0.0))
        }
    };
    upper / (lower + upper)
}

/// Fourth-order central difference with error-cancelling step pair.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}
