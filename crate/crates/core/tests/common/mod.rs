//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Adaptive Simpson quadrature of a complex integrand on `[lo, hi]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, lo: f64, hi: f64, tol: f64) -> Complex64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
    let whole = (fa + fm * 4.0 + fb) * ((hi - lo) / 6.0);
    rec(f, lo, hi, fa, fm, fb, whole, tol, 60)
}

/// `∫_0^a e^{-cr} (2/a - 2r/a²) dr` by adaptive quadrature.
pub fn kernel_oracle(c: Complex64, a: f64) -> Complex64 {
    let f = |r: f64| (-c * r).exp() * (2.0 / a - 2.0 * r / (a * a));
    // Scale the absolute tolerance to the size of the integrand.
    let scale = (-c.re * a).exp().max(1.0) * 2.0 / a;
    adaptive_simpson(&f, 0.0, a, 1e-15 * scale)
}

/// Monte Carlo estimate of `E[S(Y)]`, `Y ~ N(u, v)`: `(mean, standard error)`.
pub fn mc_expectation<R: Rng>(u: f64, v: f64, samples: usize, rng: &mut R) -> (f64, f64) {
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let z: f64 = rng.sample(StandardNormal);
        let y = delaynet::model::sigmoid_s(u + v.sqrt() * z);
        s += y;
        s2 += y * y;
    }
    let n = samples as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / n).sqrt())
}

/// Pearson correlation; zero when either series is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
