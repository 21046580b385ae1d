use num_complex::Complex64;

use delaynet::disorder::{kernel_transform, Atom, DisorderLaw};
use delaynet::meanfield::{
    build_quadrature, picard_meanfield, simulate_moments, stationary_point, FiringRateMeanField, MomentInit,
};
use delaynet::model::{FiringRateModel, PiecewiseConstant, PopulationParams};
use delaynet::netsim::{InitialHistory, SimConfig};
use delaynet::oscillation::detect_oscillation;

fn sweep_moments(a: f64, t_end: f64) -> Vec<f64> {
    let law = DisorderLaw::small_world(a, 0.1, 1.3, -5.0).unwrap();
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1).unwrap();
    let quad = build_quadrature(&law, 64).unwrap();
    let traj =
        simulate_moments(&model, &quad.into(), &SimConfig::new(0.01, t_end, 0), &MomentInit::single(0.1, 1.5)).unwrap();
    traj.u(0).to_vec()
}

#[test]
fn mean_settles_or_cycles_with_field_length() {
    let cycling = sweep_moments(2.5, 600.0);
    let osc = detect_oscillation(&cycling, 0.01, 0.5, 0.05).unwrap();
    assert!(osc.oscillatory, "a=2.5: {osc:?}");
    let settling = sweep_moments(0.5, 600.0);
    assert!(settling.last().unwrap().abs() < 1e-3, "a=0.5: u(T)={}", settling.last().unwrap());
}

#[test]
fn small_world_mass_is_the_kernel() {
    let law = DisorderLaw::small_world(3.0, 0.2, 1.0, -2.0).unwrap();
    let quad = build_quadrature(&law, 64).unwrap();
    let k = kernel_transform(Complex64::new(0.2, 0.0), 3.0).unwrap().re;
    assert!((quad.weighted_mass() / -2.0 - k).abs() < 1e-10);
    let full = build_quadrature(&DisorderLaw::small_world(3.0, 0.0, 1.0, -2.0).unwrap(), 64).unwrap();
    assert!((full.weighted_mass() + 2.0).abs() < 1e-10);
    let masses: f64 = quad.nodes().iter().map(|q| q.mass).sum();
    assert!((masses - 1.0).abs() < 1e-12);
    assert!(quad.nodes().iter().all(|q| (1.0..=4.0).contains(&q.delay)));
}

#[test]
fn atom_law_is_taken_verbatim() {
    let law = DisorderLaw::discrete(vec![Atom { weight: -1.5, delay: 0.7, prob: 1.0 }]).unwrap();
    let quad = build_quadrature(&law, 8).unwrap();
    assert_eq!(quad.nodes().len(), 1);
    assert_eq!((quad.nodes()[0].weight, quad.nodes()[0].delay, quad.nodes()[0].mass), (-1.5, 0.7, 1.0));
}

#[test]
fn stationary_points_per_population() {
    let model = FiringRateModel::new(
        vec![
            PopulationParams::new(3.0, 1.0, 10),
            PopulationParams::new(1.0, 0.5, 10),
            PopulationParams::new(2.0, 0.0, 10),
        ],
        vec![vec![0.0; 3]; 3],
    )
    .unwrap();
    assert_eq!(stationary_point(&model).unwrap(), vec![(0.0, 1.5), (0.0, 0.125), (0.0, 0.0)]);
    let driven = FiringRateModel::new(
        vec![PopulationParams::new(3.0, 1.0, 10).with_input(PiecewiseConstant::constant(0.5))],
        vec![vec![-1.0]],
    )
    .unwrap();
    assert!(stationary_point(&driven).is_err());
}

#[test]
fn picard_contracts_on_a_short_horizon() {
    let law = DisorderLaw::small_world(0.5, 0.1, 0.4, -5.0).unwrap();
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1).unwrap();
    let quad = build_quadrature(&law, 32).unwrap();
    let cfg = SimConfig::new(0.02, 1.0, 5).with_initial(InitialHistory::Gaussian { mean: 1.0, variance: 0.5 });
    let res = picard_meanfield(&FiringRateMeanField::from_model(&model).unwrap(), &quad, 500, 6, &cfg).unwrap();
    let d = &res.distances;
    assert!(d[0] > 0.0);
    for k in 1..d.len() - 1 {
        assert!(d[k + 1] <= 0.5 * d[k], "distances {d:?}");
    }
}

#[test]
fn picard_follows_the_moment_equations() {
    let law = DisorderLaw::small_world(2.5, 0.1, 1.3, -5.0).unwrap();
    let model = FiringRateModel::single(3.0, 1.0, -5.0, 1).unwrap();
    let quad = build_quadrature(&law, 64).unwrap();
    let cfg = SimConfig::new(0.05, 4.0, 12).with_initial(InitialHistory::Gaussian { mean: -0.5, variance: 1.0 });
    let m = 4000;
    let res = picard_meanfield(&FiringRateMeanField::from_model(&model).unwrap(), &quad, m, 8, &cfg).unwrap();
    let mom = simulate_moments(&model, &quad.into(), &cfg, &MomentInit::single(-0.5, 1.0)).unwrap();
    let bound = 5.0 / (m as f64).sqrt();
    for k in 0..res.mean.len() {
        assert!((res.mean[k] - mom.u(0)[k]).abs() < bound, "mean at step {k}");
        assert!((res.var[k].sqrt() - mom.v(0)[k].sqrt()).abs() < bound, "sd at step {k}");
    }
}
