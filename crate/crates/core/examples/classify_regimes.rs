//! Stationary versus oscillatory regimes by characteristic roots (method A)
//! and by long moment simulations (method B).
//!
//! `cargo run --release --example classify_regimes -- [moment dt]`

use delaynet::dispersion::{classify_regime, ClassifyOptions, DispersionParams};

fn main() -> delaynet::Result<()> {
    let dt = std::env::args().nth(1).map(|s| s.parse().expect("dt"));
    let opts = ClassifyOptions { dt, ..ClassifyOptions::default() };
    let mut cases = Vec::new();
    for a in [0.5, 1.0, 1.5, 2.5, 3.5, 4.5] {
        cases.push((format!("θ=3 J̄=-5 λ=1 β=0.1 τ_s=1.3 a={a}"), DispersionParams::new(3.0, -5.0, 1.0, a, 0.1, 1.3)?));
    }
    for (beta, tau_s) in [(0.2, 2.0), (0.9, 2.0), (0.0, 2.0), (0.2, 4.0), (0.2, 6.0)] {
        cases.push((
            format!("θ=1 J̄=-3.5 λ=0.5 a=3 β={beta} τ_s={tau_s}"),
            DispersionParams::new(1.0, -3.5, 0.5, 3.0, beta, tau_s)?,
        ));
    }
    for (label, p) in cases {
        let c = classify_regime(&p, &opts)?;
        let root = c.rightmost.map_or("none".to_string(), |r| format!("{:+.5}{:+.4}i", r.re, r.im));
        println!(
            "{label:<40} A={:<12} B={:<12} rightmost={root} amplitude={:.3}",
            c.method_a.map_or("none", |r| r.as_str()),
            c.method_b.as_str(),
            c.oscillation.amplitude
        );
    }
    Ok(())
}
