//! Characteristic roots of the linearized moment equation along a delay
//! sweep, showing a root pair crossing the imaginary axis.
//!
//! `cargo run --release --example dispersion_roots -- [a]`

use num_complex::Complex64;

use delaynet::dispersion::{characteristic_roots, dispersion_residual, newton_root, DispersionParams};

fn main() -> delaynet::Result<()> {
    let a: f64 = std::env::args().nth(1).map_or(2.5, |s| s.parse().expect("a"));
    let base = DispersionParams::new(3.0, -5.0, 1.0, a, 0.1, 1.3)?;
    println!("gain g0 = {:.4}, v* = {}", base.gain(), base.v_star());
    for tau_s in [0.8, 1.0, 1.2, 1.3, 1.4, 1.6, 2.0] {
        let p = base.with_tau_s(tau_s);
        let roots = characteristic_roots(&p, 16, 24);
        match roots.first() {
            Some(r) => println!("τ_s={tau_s}: rightmost ξ = {:+.5} {:+.5}i ({} roots)", r.re, r.im, roots.len()),
            None => println!("τ_s={tau_s}: no root found"),
        }
    }
    if let Some(r) = newton_root(Complex64::new(0.0, 1.0), &base, 100) {
        println!("Newton from i: ξ = {r:.6}, |R(ξ)| = {:.1e}", dispersion_residual(r, &base).norm());
    }
    Ok(())
}
