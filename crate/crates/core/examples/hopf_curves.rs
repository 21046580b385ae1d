//! Hopf curves of the small-world firing-rate model: the `(a, τ_s)` curve at
//! fixed β and the `(β, τ_s)` curve at fixed a, with residual checks.
//!
//! `cargo run --release --example hopf_curves`

use delaynet::dispersion::{
    dispersion_residual, hopf_curve_fixed_a, hopf_curve_fixed_beta, DispersionParams, HopfPoint,
};
use num_complex::Complex64;

fn worst_residual(points: &[HopfPoint], base: &DispersionParams) -> f64 {
    points
        .iter()
        .map(|h| {
            let p = DispersionParams { a: h.a, beta: h.beta, tau_s: h.tau_s, ..*base };
            dispersion_residual(Complex64::new(0.0, h.omega), &p).norm()
        })
        .fold(0.0, f64::max)
}

/// Linear interpolation of τ_s at `x` along a curve sorted by `key`.
fn tau_at(points: &[HopfPoint], key: fn(&HopfPoint) -> f64, x: f64) -> Option<f64> {
    let mut pts: Vec<&HopfPoint> = points.iter().collect();
    pts.sort_by(|p, q| key(p).total_cmp(&key(q)));
    pts.windows(2).find(|w| key(w[0]) <= x && x <= key(w[1])).map(|w| {
        let s = (x - key(w[0])) / (key(w[1]) - key(w[0]));
        w[0].tau_s + s * (w[1].tau_s - w[0].tau_s)
    })
}

fn main() -> delaynet::Result<()> {
    let field_params = DispersionParams::new(3.0, -5.0, 1.0, 1.0, 0.1, 1.3)?;
    let grid: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.005).collect();
    let curve = hopf_curve_fixed_beta(0.1, &field_params, &grid, 0)?;
    let min = curve.points.iter().min_by(|p, q| p.tau_s.total_cmp(&q.tau_s)).expect("non-empty curve");
    println!(
        "fixed β=0.1: {} points, a in [{:.3}, {:.3}], minimum τ_s={:.4} at a={:.4}, worst |R(iω)|={:.1e}",
        curve.points.len(),
        curve.points.iter().map(|p| p.a).fold(f64::INFINITY, f64::min),
        curve.points.iter().map(|p| p.a).fold(0.0, f64::max),
        min.tau_s,
        min.a,
        worst_residual(&curve.points, &field_params)
    );
    for a in [0.5, 1.0, 2.5, 4.5] {
        println!("  critical τ_s at a={a}: {:?}", tau_at(&curve.points, |p| p.a, a));
    }

    let decay_params = DispersionParams::new(1.0, -3.5, 0.5, 3.0, 0.2, 2.0)?;
    let betas: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
    let curve = hopf_curve_fixed_a(3.0, &decay_params, &betas, 0)?;
    println!(
        "fixed a=3: {} points, {} β values skipped, worst |R(iω)|={:.1e}",
        curve.points.len(),
        curve.skipped.len(),
        worst_residual(&curve.points, &decay_params)
    );
    for beta in [0.0, 0.2, 0.5, 0.9] {
        println!("  critical τ_s at β={beta}: {:?}", tau_at(&curve.points, |p| p.beta, beta));
    }
    Ok(())
}
