//! Quenched and annealed mean-square distance between network neurons and
//! their coupled mean-field processes, versus N.
//!
//! `cargo run --release --example convergence_rate -- [trials] [dt]`

use std::time::Instant;

use delaynet::disorder::DisorderLaw;
use delaynet::harness::{annealed_convergence, quenched_convergence, Experiment};
use delaynet::model::FiringRateModel;
use delaynet::netsim::{InitialHistory, SimConfig};

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map_or(16, |s| s.parse().expect("trials"));
    let dt: f64 = args.next().map_or(0.05, |s| s.parse().expect("dt"));
    let law = DisorderLaw::small_world(0.5, 0.1, 1.3, -5.0)?;
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1)?;
    let cfg = SimConfig::new(dt, 5.0, 0).with_initial(InitialHistory::Gaussian { mean: 0.0, variance: 1.5 });
    let exp = Experiment::new(law, model, vec![100, 200, 400, 800, 1600, 3200], trials, 7, cfg);
    for report in [quenched_convergence(&exp)?, annealed_convergence(&exp)?] {
        let start = Instant::now();
        println!("{} (fit {:?})", report.mode.as_str(), report.fit);
        for i in 0..report.ns.len() {
            println!("  N={:5} mse={:.4e} ± {:.1e}", report.ns[i], report.mse[i], report.stderr[i]);
        }
        println!("  {}", report.summary_json(-1.3, -0.7));
        let _ = start;
    }
    Ok(())
}
