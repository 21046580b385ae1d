//! Runs a network next to its mean-field coupling (same Brownian motions,
//! same initial values) and prints how far the tagged neurons drift apart.
//!
//! `cargo run --release --example coupled_paths -- [n] [t_end]`

use delaynet::disorder::{sample_realization, DisorderLaw};
use delaynet::meanfield::{build_quadrature, simulate_moments, MomentInit};
use delaynet::model::FiringRateModel;
use delaynet::netsim::{simulate_coupled, InitialHistory, SimConfig};

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2000, |s| s.parse().expect("n"));
    let t_end: f64 = args.next().map_or(5.0, |s| s.parse().expect("t_end"));
    let law = DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, n)?;
    let cfg = SimConfig::new(0.05, t_end, 2).with_initial(InitialHistory::Gaussian { mean: 0.0, variance: 1.5 });

    let quad = build_quadrature(&law, 64)?;
    let mf = simulate_moments(&model, &quad.into(), &cfg, &MomentInit::single(0.0, 1.5))?;
    let real = sample_realization(&law, n, 1)?;
    let (net, coupled) = simulate_coupled(&model, &real, &mf, &cfg)?;

    for (t, (x, y)) in net.paths.iter().zip(&coupled.paths).enumerate() {
        let sup = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("neuron {:>4}: sup |X - X̄| = {sup:.4}", net.tagged[t]);
    }
    let k = net.steps;
    println!(
        "population mean at T: network {:.4}, coupled {:.4}, moments {:.4}",
        net.mean[0][k],
        coupled.mean[0][k],
        mf.u(0)[k]
    );
    Ok(())
}
