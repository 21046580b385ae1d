//! Integrates the Gaussian moment equations for a sweep of field lengths and
//! reports where the mean settles and where it cycles.
//!
//! `cargo run --release --example moment_equations -- [t_end] [moments.csv]`

use std::fs::File;
use std::io::BufWriter;

use delaynet::disorder::DisorderLaw;
use delaynet::meanfield::{build_quadrature, simulate_moments, stationary_point, MomentInit};
use delaynet::model::FiringRateModel;
use delaynet::netsim::SimConfig;
use delaynet::oscillation::detect_oscillation;

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let t_end: f64 = args.next().map_or(1200.0, |s| s.parse().expect("t_end"));
    let path = args.next();
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1)?;
    let (u_star, v_star) = stationary_point(&model)?[0];
    println!("stationary point (u*, v*) = ({u_star}, {v_star})");

    let cfg = SimConfig::new(0.01, t_end, 0);
    for a in [0.5, 1.0, 1.5, 2.5, 3.5, 4.5] {
        let quad = build_quadrature(&DisorderLaw::small_world(a, 0.1, 1.3, -5.0)?, 64)?;
        let traj = simulate_moments(&model, &quad.into(), &cfg, &MomentInit::single(0.1, v_star))?;
        let osc = detect_oscillation(traj.u(0), cfg.dt, 0.5, 0.05)?;
        let period = osc.frequency.map_or("-".to_string(), |f| format!("{:.2}", 1.0 / f));
        println!("a={a}: oscillatory={} amplitude={:.4} period={period}", osc.oscillatory, osc.amplitude);
        if a == 2.5 {
            if let Some(path) = &path {
                traj.write_csv(BufWriter::new(File::create(path)?), 10)?;
            }
        }
    }
    Ok(())
}
