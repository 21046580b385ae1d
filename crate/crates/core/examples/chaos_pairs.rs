//! Propagation of chaos: time correlation of disjoint tagged neuron pairs,
//! raw and corrected by the correlation of their independent coupled
//! mean-field copies, versus N.
//!
//! `cargo run --release --example chaos_pairs -- [beta] [trials]`

use delaynet::disorder::DisorderLaw;
use delaynet::harness::{chaos_pairs, Experiment};
use delaynet::model::FiringRateModel;
use delaynet::netsim::{InitialHistory, SimConfig};

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map_or(0.1, |s| s.parse().expect("beta"));
    let trials: usize = args.next().map_or(16, |s| s.parse().expect("trials"));
    let law = DisorderLaw::small_world(0.5, beta, 1.3, -5.0)?;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1)?;
    let cfg = SimConfig::new(0.05, 5.0, 0).with_initial(InitialHistory::Gaussian { mean: 0.0, variance: 1.5 });
    let exp = Experiment::new(law, model, vec![100, 400, 1600], trials, 5, cfg);
    println!("{:>6} {:>10} {:>10}", "N", "raw", "corrected");
    for row in chaos_pairs(&exp)? {
        println!("{:>6} {:>10.4} {:>10.4}", row.n, row.raw, row.corrected);
    }
    Ok(())
}
