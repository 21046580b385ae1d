//! Linear stability of the stationary state of the one-population
//! small-world moment system.
//!
//! Linearizing around `(0, v*)` gives the characteristic equation
//!
//! ```text
//! R(ξ) = ξ + 1/θ - g₀ e^{-ξτ_s} K_a(β + ξ) = 0,    g₀ = J̄ / √(2π(1 + v*))
//! ```
//!
//! with `K_a` the Laplace transform of the distance density. A Hopf point is
//! a purely imaginary root `ξ = iω`; in the unit-length variables `Ω = aω`,
//! `B = aβ` the delay kernel factor is `Z(Ω, B) = g₀ K_1(B + iΩ)`, so Hopf
//! points satisfy `ω² + 1/θ² = |Z|²` and `ωτ_s = Arg Z - Arg(1/θ + iω) + 2kπ`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::disorder::{kernel, kernel_derivative, DisorderLaw};
use crate::meanfield::{build_quadrature, simulate_moments, MomentInit, DEFAULT_PANELS};
use crate::model::FiringRateModel;
use crate::netsim::SimConfig;
use crate::oscillation::{detect_oscillation, Oscillation, DEFAULT_AMPLITUDE_THRESHOLD};
use crate::{Error, Result};

/// Parameters of the one-population small-world firing-rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionParams {
    pub theta: f64,
    pub j_bar: f64,
    pub lambda: f64,
    pub a: f64,
    pub beta: f64,
    pub tau_s: f64,
}

impl DispersionParams {
    pub fn new(theta: f64, j_bar: f64, lambda: f64, a: f64, beta: f64, tau_s: f64) -> Result<Self> {
        let p = Self { theta, j_bar, lambda, a, beta, tau_s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("theta", self.theta), ("a", self.a), ("tau_s", self.tau_s)];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::config(format!("{name} must be > 0, got {value}")));
            }
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !self.j_bar.is_finite() {
            return Err(Error::config("j_bar must be finite"));
        }
        Ok(())
    }

    pub fn v_star(&self) -> f64 {
        0.5 * self.lambda * self.lambda * self.theta
    }

    pub fn gain(&self) -> f64 {
        self.j_bar / (2.0 * PI * (1.0 + self.v_star())).sqrt()
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn with_tau_s(self, tau_s: f64) -> Self {
        Self { tau_s, ..self }
    }

    pub fn law(&self) -> Result<DisorderLaw> {
        DisorderLaw::small_world(self.a, self.beta, self.tau_s, self.j_bar)
    }

    pub fn model(&self, n: usize) -> Result<FiringRateModel> {
        FiringRateModel::single(self.theta, self.lambda, self.j_bar, n)
    }
}

/// A point `(a, β, τ_s, ω, k)` of a Hopf curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub a: f64,
    pub beta: f64,
    pub tau_s: f64,
    pub omega: f64,
    pub k: i64,
}

/// A traced curve with the grid nodes that produced no point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HopfCurve {
    pub points: Vec<HopfPoint>,
    /// `(grid value, reason)` for each skipped node.
    pub skipped: Vec<(f64, String)>,
    /// No grid node had enough gain to sustain a Hopf point.
    pub subcritical: bool,
}

impl HopfCurve {
    /// Points of branch `k` only.
    pub fn branch(&self, k: i64) -> Vec<HopfPoint> {
        self.points.iter().copied().filter(|p| p.k == k).collect()
    }

    /// CSV `a,beta,tau_s,omega,k`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "a,beta,tau_s,omega,k")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{},{}", p.a, p.beta, p.tau_s, p.omega, p.k)?;
        }
        Ok(())
    }
}

/// `Z(Ω, B) = g₀ K_1(B + iΩ)`.
pub fn z_function(omega_cap: f64, b_cap: f64, params: &DispersionParams) -> Complex64 {
    params.gain() * kernel(Complex64::new(b_cap, omega_cap), 1.0)
}

/// `R(ξ) = ξ + 1/θ - g₀ e^{-ξτ_s} K_a(β + ξ)`.
pub fn dispersion_residual(xi: Complex64, params: &DispersionParams) -> Complex64 {
    let c = xi + params.beta;
    xi + 1.0 / params.theta - params.gain() * (-xi * params.tau_s).exp() * kernel(c, params.a)
}

/// `R'(ξ)`.
pub fn dispersion_derivative(xi: Complex64, params: &DispersionParams) -> Complex64 {
    let c = xi + params.beta;
    let e = (-xi * params.tau_s).exp();
    let k = kernel(c, params.a);
    let dk = kernel_derivative(c, params.a);
    Complex64::new(1.0, 0.0) - params.gain() * e * (dk - k * params.tau_s)
}

/// Smallest positive `τ_s` on the phase condition, with its branch index.
fn phase_delay(z: Complex64, omega: f64, theta: f64) -> (f64, i64) {
    let phase = z.arg() - Complex64::new(1.0 / theta, omega).arg();
    let mut k = (-phase / (2.0 * PI)).floor() as i64;
    while phase + 2.0 * PI * k as f64 <= 0.0 {
        k += 1;
    }
    while k > 0 && phase + 2.0 * PI * (k - 1) as f64 > 0.0 {
        k -= 1;
    }
    ((phase + 2.0 * PI * k as f64) / omega, k)
}

fn emit_branches(points: &mut Vec<HopfPoint>, base: HopfPoint, phase_tau: f64, extra: usize) {
    points.push(base);
    for j in 1..=extra {
        let k = base.k + j as i64;
        points.push(HopfPoint { tau_s: phase_tau + 2.0 * PI * j as f64 / base.omega, k, ..base });
    }
}

/// Traces the curve in the `(a, τ_s)` plane at fixed `β` by sweeping the
/// reduced frequency `Ω`. For each `Ω`, `B = βa` is solved self-consistently
/// from `a² = Ω² / (|Z(Ω, B)|² - 1/θ²)`. `extra_branches` adds the
/// `k+1, ..., k+extra` copies of each point.
pub fn hopf_curve_fixed_beta(
    beta: f64,
    params: &DispersionParams,
    omega_grid: &[f64],
    extra_branches: usize,
) -> Result<HopfCurve> {
    let params = params.with_beta(beta);
    params.validate()?;
    if omega_grid.iter().any(|&w| !(w > 0.0)) || omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("the Ω grid must be positive and increasing"));
    }
    let loss = 1.0 / (params.theta * params.theta);
    let mut curve = HopfCurve::default();
    let mut any_gain = false;
    for &cap in omega_grid {
        let mut b = 0.0;
        let mut found = None;
        let mut reason = "B iteration did not converge".to_string();
        for _ in 0..200 {
            let z = z_function(cap, b, &params);
            let excess = z.norm_sqr() - loss;
            if !(excess > 0.0) {
                reason = "gain below loss".to_string();
                found = None;
                break;
            }
            any_gain = true;
            let a = cap / excess.sqrt();
            let b_next = beta * a;
            if (b_next - b).abs() <= 1e-10 * b_next.abs().max(1.0) {
                found = Some((a, b_next));
                break;
            }
            b = b_next;
        }
        let Some((a, b)) = found else {
            curve.skipped.push((cap, reason));
            continue;
        };
        let omega = cap / a;
        let z = z_function(cap, b, &params);
        let (tau_s, k) = phase_delay(z, omega, params.theta);
        emit_branches(&mut curve.points, HopfPoint { a, beta, tau_s, omega, k }, tau_s, extra_branches);
    }
    curve.subcritical = !any_gain;
    Ok(curve)
}

/// Traces the curve in the `(β, τ_s)` plane at fixed `a`. For each `β`, all
/// roots `ω` of `ω² + 1/θ² - |Z(aω, aβ)|²` on `(0, ω_max]` are found by a
/// sign scan and bisection, where `ω_max² = g₀² K_a(β)² - 1/θ²` bounds the
/// frequencies with enough gain.
pub fn hopf_curve_fixed_a(
    a: f64,
    params: &DispersionParams,
    beta_grid: &[f64],
    extra_branches: usize,
) -> Result<HopfCurve> {
    const SCAN: usize = 2000;
    let params = params.with_a(a);
    params.validate()?;
    if beta_grid.iter().any(|&b| !(b >= 0.0)) {
        return Err(Error::config("β grid values must be >= 0"));
    }
    let loss = 1.0 / (params.theta * params.theta);
    let mut curve = HopfCurve::default();
    let mut any_gain = false;
    for &beta in beta_grid {
        let p = params.with_beta(beta);
        let bound = p.gain().powi(2) * kernel(Complex64::new(beta, 0.0), a).re.powi(2) - loss;
        if !(bound > 0.0) {
            curve.skipped.push((beta, "gain below loss".to_string()));
            continue;
        }
        any_gain = true;
        let omega_max = bound.sqrt();
        let f = |w: f64| w * w + loss - z_function(a * w, a * beta, &p).norm_sqr();
        let mut roots = Vec::new();
        let mut prev_w = 0.0;
        let mut prev_f = f(0.0);
        for i in 1..=SCAN {
            let w = omega_max * i as f64 / SCAN as f64;
            let fw = f(w);
            if fw == 0.0 {
                roots.push(w);
            } else if prev_f < 0.0 && fw > 0.0 || prev_f > 0.0 && fw < 0.0 {
                let (mut lo, mut hi) = (prev_w, w);
                let flo_neg = prev_f < 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (f(mid) < 0.0) == flo_neg {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_w = w;
            prev_f = fw;
        }
        if roots.is_empty() {
            curve.skipped.push((beta, "no frequency root".to_string()));
        }
        for omega in roots {
            let z = z_function(a * omega, a * beta, &p);
            let (tau_s, k) = phase_delay(z, omega, p.theta);
            emit_branches(&mut curve.points, HopfPoint { a, beta, tau_s, omega, k }, tau_s, extra_branches);
        }
    }
    curve.subcritical = !any_gain;
    Ok(curve)
}

/// Newton's method on `R` from `seed`.
pub fn newton_root(seed: Complex64, params: &DispersionParams, max_iter: usize) -> Option<Complex64> {
    let mut xi = seed;
    for _ in 0..max_iter {
        let r = dispersion_residual(xi, params);
        let d = dispersion_derivative(xi, params);
        if !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let step = r / d;
        // Cap the step so that exp(-ξτ_s) cannot overflow.
        let step = if step.norm() > 2.0 { step * (2.0 / step.norm()) } else { step };
        xi -= step;
        if !xi.is_finite() || xi.re < -50.0 / params.tau_s {
            return None;
        }
        if step.norm() < 1e-13 * xi.norm().max(1.0) {
            let r = dispersion_residual(xi, params);
            return (r.norm() < 1e-9).then_some(xi);
        }
    }
    None
}

/// Distinct roots found from a grid of Newton seeds in
/// `Re ξ ∈ [-3/θ, 2]`, `Im ξ ∈ [0, 4π/τ_s]`, sorted by decreasing real part.
pub fn characteristic_roots(params: &DispersionParams, re_seeds: usize, im_seeds: usize) -> Vec<Complex64> {
    let (re_lo, re_hi) = (-3.0 / params.theta, 2.0);
    let im_hi = 4.0 * PI / params.tau_s;
    let mut roots: Vec<Complex64> = Vec::new();
    for i in 0..re_seeds {
        for j in 0..im_seeds {
            let re = re_lo + (re_hi - re_lo) * i as f64 / (re_seeds - 1).max(1) as f64;
            let im = im_hi * j as f64 / (im_seeds - 1).max(1) as f64;
            if let Some(mut root) = newton_root(Complex64::new(re, im), params, 100) {
                if root.im < 0.0 {
                    root = root.conj();
                }
                if root.im.abs() < 1e-10 {
                    root.im = 0.0;
                }
                if !roots.iter().any(|r| (r - root).norm() < 1e-7 * root.norm().max(1.0)) {
                    roots.push(root);
                }
            }
        }
    }
    roots.sort_by(|x, y| y.re.total_cmp(&x.re));
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Stationary,
    Oscillatory,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Stationary => "stationary",
            Regime::Oscillatory => "oscillatory",
        }
    }
}

/// Settings of [`classify_regime`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub root_tol: f64,
    pub re_seeds: usize,
    pub im_seeds: usize,
    /// Moment simulation: horizon, initial mean offset, step. The default
    /// step `min(τ_s/20, 0.01)` keeps the anti-damping of explicit Euler
    /// below the decay rate of near-critical modes.
    pub t_end: f64,
    pub u0: f64,
    pub dt: Option<f64>,
    pub transient_fraction: f64,
    pub amp_threshold: f64,
    pub n_panels: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            root_tol: 1e-6,
            re_seeds: 16,
            im_seeds: 24,
            t_end: 1200.0,
            u0: 0.1,
            dt: None,
            transient_fraction: 0.5,
            amp_threshold: DEFAULT_AMPLITUDE_THRESHOLD,
            n_panels: DEFAULT_PANELS,
        }
    }
}

/// Both verdicts on one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// `None` when Newton failed from every seed.
    pub method_a: Option<Regime>,
    pub method_b: Regime,
    pub rightmost: Option<Complex64>,
    pub oscillation: Oscillation,
    pub agree: bool,
}

impl Classification {
    /// The root verdict when available, the simulation verdict otherwise.
    pub fn regime(&self) -> Regime {
        self.method_a.unwrap_or(self.method_b)
    }
}

/// Method A alone: oscillatory iff the rightmost root has `Re ξ > root_tol`.
pub fn classify_by_roots(params: &DispersionParams, opts: &ClassifyOptions) -> (Option<Regime>, Option<Complex64>) {
    let roots = characteristic_roots(params, opts.re_seeds, opts.im_seeds);
    match roots.first() {
        Some(&r) => {
            let regime = if r.re > opts.root_tol { Regime::Oscillatory } else { Regime::Stationary };
            (Some(regime), Some(r))
        }
        None => (None, None),
    }
}

/// Method B alone: integrate the moment system from `(u0, v*)` and look for
/// a sustained oscillation of `u`.
pub fn classify_by_moments(params: &DispersionParams, opts: &ClassifyOptions) -> Result<Oscillation> {
    let model = params.model(1)?;
    let quad = build_quadrature(&params.law()?, opts.n_panels)?;
    let dt = opts.dt.unwrap_or_else(|| (params.tau_s / 20.0).min(0.01));
    let cfg = SimConfig::new(dt, opts.t_end, 0);
    let traj = simulate_moments(&model, &quad.into(), &cfg, &MomentInit::single(opts.u0, params.v_star()))?;
    detect_oscillation(traj.u(0), dt, opts.transient_fraction, opts.amp_threshold)
}

pub fn classify_regime(params: &DispersionParams, opts: &ClassifyOptions) -> Result<Classification> {
    params.validate()?;
    let (method_a, rightmost) = classify_by_roots(params, opts);
    let oscillation = classify_by_moments(params, opts)?;
    let method_b = if oscillation.oscillatory { Regime::Oscillatory } else { Regime::Stationary };
    Ok(Classification { method_a, method_b, rightmost, oscillation, agree: method_a == Some(method_b) })
}

/// Stable label for a parameter set in classification exports.
pub fn param_hash(params: &DispersionParams) -> String {
    let fields = [params.theta, params.j_bar, params.lambda, params.a, params.beta, params.tau_s];
    let h = fields.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, x| {
        x.to_bits().to_le_bytes().iter().fold(h, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    });
    format!("{h:016x}")
}

/// CSV `param_hash,methodA,methodB,agree`.
pub fn write_classification_csv<W: Write>(rows: &[(DispersionParams, Classification)], mut out: W) -> Result<()> {
    writeln!(out, "param_hash,methodA,methodB,agree")?;
    for (p, c) in rows {
        let a = c.method_a.map_or("none", Regime::as_str);
        writeln!(out, "{},{},{},{}", param_hash(p), a, c.method_b.as_str(), c.agree)?;
    }
    Ok(())
}
