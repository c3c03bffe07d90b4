#![allow(dead_code)]

use cnls_core::grid::{RadialField, RadialGridSpec};
use cnls_core::params::Dim;
use num_complex::Complex;
use rand::Rng;

/// Sum of one to three Gaussian shells, possibly sign-changing.
pub fn random_profile(dim: Dim, spec: RadialGridSpec<f64>, rng: &mut impl Rng) -> RadialField<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let amp = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.25) { -1.0 } else { 1.0 };
            (amp, rng.gen_range(0.0..3.0), rng.gen_range(0.3..2.5))
        })
        .collect();
    RadialField::from_fn(dim, spec, |r: f64| {
        terms.iter().map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()
    })
}

/// Composite Simpson rule on `[lo, hi]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..n {
        s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Random real Gaussian on a 1D periodic grid, `|u|_2 = a`.
pub fn random_gaussian_1d(points: usize, half_length: f64, a: f64, rng: &mut impl Rng) -> Vec<Complex<f64>> {
    let w = rng.gen_range(0.4..3.0);
    let c = rng.gen_range(-3.0..3.0);
    let k = rng.gen_range(-1.0..1.0);
    let dx = 2.0 * half_length / points as f64;
    let v: Vec<Complex<f64>> = (0..points)
        .map(|j| {
            let x = -half_length + j as f64 * dx;
            let z = (x - c) / w;
            Complex::from_polar((-z * z / 2.0).exp(), k * x)
        })
        .collect();
    let m: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    v.into_iter().map(|z| z * (a / m.sqrt())).collect()
}
