//! Same-noise Picard iteration of the mean-field law map, compared with the
//! Gaussian moment equations.
//!
//! `cargo run --release --example picard_solver -- [m] [iters]`

use delaynet::disorder::DisorderLaw;
use delaynet::meanfield::{build_quadrature, picard_meanfield, simulate_moments, FiringRateMeanField, MomentInit};
use delaynet::model::FiringRateModel;
use delaynet::netsim::{InitialHistory, SimConfig};

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(10_000, |s| s.parse().expect("m"));
    let iters: usize = args.next().map_or(10, |s| s.parse().expect("iters"));
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1)?;
    let quad = build_quadrature(&DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?, 64)?;
    let cfg = SimConfig::new(0.05, 5.0, 3).with_initial(InitialHistory::Gaussian { mean: 1.0, variance: 0.5 });

    let res = picard_meanfield(&FiringRateMeanField::from_model(&model)?, &quad, m, iters, &cfg)?;
    let moments = simulate_moments(&model, &quad.clone().into(), &cfg, &MomentInit::single(1.0, 0.5))?;
    for (k, d) in res.distances.iter().enumerate() {
        println!("d_{} = {d:.3e}", k + 1);
    }
    let mean_err = res.mean.iter().zip(moments.u(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sd_err = res.var.iter().zip(moments.v(0)).map(|(a, b)| (a.sqrt() - b.sqrt()).abs()).fold(0.0, f64::max);
    println!(
        "max |mean - u| = {mean_err:.4}, max |sd - √v| = {sd_err:.4}, bound 5/√m = {:.4}",
        5.0 / (m as f64).sqrt()
    );
    Ok(())
}
