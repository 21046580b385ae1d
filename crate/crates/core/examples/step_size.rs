//! Weak order of the Euler–Maruyama scheme: population mean at T for three
//! step sizes sharing one Brownian path per neuron, and the Richardson ratio
//! `(m(dt) - m(dt/2)) / (m(dt/2) - m(dt/4))`, which tends to 2.
//!
//! `cargo run --release --example step_size -- [N] [T]`

use delaynet::disorder::{sample_realization, DisorderLaw};
use delaynet::model::FiringRateModel;
use delaynet::netsim::{simulate_network, InitialHistory, SimConfig};

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2000, |s| s.parse().expect("N"));
    let t_end: f64 = args.next().map_or(5.0, |s| s.parse().expect("T"));
    let law = DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?;
    let real = sample_realization(&law, n, 1)?;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, n)?;
    let mut finals = Vec::new();
    for (dt, substeps) in [(0.1, 4), (0.05, 2), (0.025, 1)] {
        let cfg = SimConfig::new(dt, t_end, 9)
            .with_initial(InitialHistory::Gaussian { mean: 1.0, variance: 1.5 })
            .with_noise_substeps(substeps);
        let traj = simulate_network(&model, &real, &cfg)?;
        let m = *traj.population_mean().last().unwrap();
        println!("dt={dt:<6} mean(T)={m:.8}");
        finals.push(m);
    }
    let ratio = (finals[0] - finals[1]) / (finals[1] - finals[2]);
    println!("Richardson ratio = {ratio:.3}");
    Ok(())
}
